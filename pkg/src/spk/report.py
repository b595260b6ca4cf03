"""Per-chain comparison reports: every applicable bound next to the exact
mixing time, as CSV + JSON, with companion figures rendered to files.

Bound selection adapts to size: chains inside the enumeration cap get exact
profile machinery; larger chains fall back to certified envelope
generators (volume growth, optional local Poincare, the minimum-edge-flow
conductance envelope) and set-family anti-Faber-Krahn input.
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import bounds as B
from . import profiles as P
from .chain import multiplicative_symmetrizations
from .errors import RegularityFailed, SpkError
from .exact import distance_curve, exact_tau
from .profiles import ENUMERATION_CAP


@dataclass
class ReportOptions:
    eps: float = math.exp(-1)
    enumeration_cap: int = ENUMERATION_CAP
    poincare_a: float | None = None
    moderate_growth: tuple | None = None  # (A, d)
    nash: tuple | None = None             # (C, D, T)
    rho: float | None = None
    estimate_rho: bool = False
    discrete: bool = False
    delta: float = 1.0 / 6.0
    figures: bool = True
    seed: int = 0
    anti_fk_sets: tuple | None = None


@dataclass
class ChainReport:
    name: str
    n: int
    eps: float
    lambda_1: float
    pi_star: float
    exact_tau_inf: float
    reports: list = field(default_factory=list)
    profiles: dict = field(default_factory=dict)

    def rows(self):
        out = []
        for rep in self.reports:
            ratio = (rep.value / self.exact_tau_inf
                     if self.exact_tau_inf > 0 and
                     not rep.name.startswith("tau_inf_discrete") and
                     rep.name.startswith("tau_inf") else np.nan)
            out.append({
                "chain": self.name,
                "name": rep.name,
                "validity": rep.validity,
                "value": rep.value,
                "epsilon": rep.epsilon,
                "exact": self.exact_tau_inf,
                "ratio": ratio,
                "certified": rep.certified,
                "assumptions": ";".join(rep.assumptions),
            })
        return out

    def csv(self):
        lines = ["chain,name,validity,value,epsilon,exact,ratio,certified,"
                 "assumptions"]
        for row in self.rows():
            lines.append(
                f'{row["chain"]},{row["name"]},{row["validity"]},'
                f'{row["value"]:.9g},{row["epsilon"]:.9g},'
                f'{row["exact"]:.9g},{row["ratio"]:.9g},'
                f'{row["certified"]},{row["assumptions"]}'
            )
        return "\n".join(lines) + "\n"

    def to_json(self):
        return json.dumps({
            "chain": self.name,
            "n": self.n,
            "epsilon": self.eps,
            "lambda_1": self.lambda_1,
            "pi_star": self.pi_star,
            "exact_tau_inf": self.exact_tau_inf,
            "bounds": [rep.to_json() for rep in self.reports],
        }, indent=2)


def spectral_lower_input(chain, opts):
    """The best certified lower bound of the spectral profile available at
    this size, spectral-gap floored.  Returns (profile, flag, extras)."""
    lam1 = P.spectral_gap(chain)
    if chain.n <= opts.enumeration_cap:
        band = P.spectral_profile_exhaustive(chain, cap=opts.enumeration_cap)
        return band.bound_input(), B.FLAG_BAND_EDGE, {"band": band}
    growth = P.growth_data(chain)
    envs = [P.volume_profile_bound(chain, growth=growth)]
    if opts.poincare_a:
        envs.append(P.poincare_profile_bound(chain, opts.poincare_a,
                                             growth=growth))
    merged = P.merge_max(envs, source="volume").floored_at(lam1)
    return merged, B.FLAG_ENVELOPE, {"growth": growth}


def conductance_input(chain, opts):
    """(Phi* profile, flag) usable in bounds: exact below the cap, the
    minimum-edge-flow lower envelope above it."""
    if chain.n <= opts.enumeration_cap:
        _, phi_star = P.conductance_profile(chain, cap=opts.enumeration_cap)
        return phi_star, None
    _, phi_star = P.conductance_lower_envelope(chain)
    return phi_star, B.FLAG_ENVELOPE


def build_report(chain, name="chain", opts=None):
    """Assemble every applicable bound plus the exact mixing time."""
    opts = opts or ReportOptions()
    eps = opts.eps
    lam1 = P.spectral_gap(chain)
    exact = exact_tau(chain, np.inf, eps, mode="continuous")
    reports = []
    profiles = {}

    profile, flag, extras = spectral_lower_input(chain, opts)
    profiles["spectral_lower"] = profile
    reports.append(B.tau_upper_spectral(profile, eps, chain.pi_star,
                                        profile_flag=flag))

    phi_star, phi_flag = conductance_input(chain, opts)
    profiles["phi_star"] = phi_star
    reports.append(B.tau_upper_conductance(phi_star, eps, chain.pi_star,
                                           profile_flag=phi_flag))

    rep2, repinf = B.tau_upper_spectral_gap(lam1, chain.pi_star, eps)
    reports.extend([rep2, repinf])

    rho, rho_estimated = opts.rho, False
    if rho is None and opts.estimate_rho:
        rho = P.estimate_logsob(chain).rho_hat
        rho_estimated = True
    if rho is not None or opts.nash is not None:
        reports.extend(B.tau_upper_combined(
            lam1, chain.pi_star, eps, rho=rho, nash=opts.nash,
            rho_estimated=rho_estimated))

    if opts.discrete and chain.holding_alpha > 0:
        alpha = chain.holding_alpha
        reports.append(B.tau_discrete_upper(profile, alpha, eps,
                                            chain.pi_star, profile_flag=flag))
        rescaled, mp = B.tau_discrete_conductance(
            phi_star, alpha, eps, chain.pi_star, profile_flag=phi_flag)
        reports.extend([rescaled, mp])
        sym = multiplicative_symmetrizations(chain)
        if sym.kk_star_irreducible and sym.k_star_k_irreducible and \
                chain.n <= opts.enumeration_cap:
            band_kk = P.spectral_profile_exhaustive(
                sym.kk_star_chain(), cap=opts.enumeration_cap)
            band_sk = P.spectral_profile_exhaustive(
                sym.k_star_k_chain(), cap=opts.enumeration_cap)
            reports.append(B.tau_discrete_upper_symmetrized(
                band_kk.bound_input(), band_sk.bound_input(),
                eps, chain.pi_star))

    if chain.reversible:
        rep_inf, rep_l1 = B.tau_lower_spectral_gap(lam1, eps)
        reports.extend([rep_inf, rep_l1])
        anti = None
        if "band" in extras:
            anti = extras["band"].lower
        else:
            fam = list(opts.anti_fk_sets or [])
            growth = extras.get("growth") or P.growth_data(chain)
            fam.extend(P.ball_family(chain, growth=growth))
            anti = P.anti_fk_profile(chain, fam)
        profiles["anti_fk"] = anti
        # the floor theorem applies at any delta where the mass scale is
        # regular; try the requested one first, then coarser fallbacks
        for delta in (opts.delta, 1.0 / 12, 1.0 / 24, 1.0 / 48, 1.0 / 96):
            try:
                reports.append(B.tau_lower_anti_fk(
                    anti, chain.pi_star, eps, delta=delta))
                break
            except RegularityFailed:
                continue

    if opts.moderate_growth is not None:
        A, d = opts.moderate_growth
        growth = extras.get("growth") or P.growth_data(chain)
        reports.append(B.dsc_moderate_growth_lower(A, d, growth.diameter))

    return ChainReport(name=name, n=chain.n, eps=eps, lambda_1=lam1,
                       pi_star=chain.pi_star, exact_tau_inf=exact,
                       reports=reports, profiles=profiles)


def render_figures(chain, report, outdir, prefix):
    """Distance-decay and profile figures next to the delimited output."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    curve = distance_curve(chain, np.inf)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.loglog(curve.times, np.maximum(curve.values, 1e-300), lw=1.5,
              label="worst-start uniform distance")
    ax.axhline(report.eps, color="gray", ls=":", lw=1,
               label=f"target {report.eps:.3g}")
    colors = {"upper": "tab:red", "lower": "tab:green"}
    for rep in report.reports:
        if not rep.name.startswith("tau_inf") or "discrete" in rep.name:
            continue
        if rep.value <= 0 or not np.isfinite(rep.value):
            continue
        ax.axvline(rep.value, color=colors[rep.validity], alpha=0.4, lw=1)
    ax.axvline(report.exact_tau_inf, color="k", lw=1.5, label="exact")
    ax.set_xlabel("t")
    ax.set_ylabel("distance")
    ax.set_title(f"{report.name}: decay and bounds (red upper, green lower)")
    ax.legend(loc="lower left", fontsize=8)
    fig.tight_layout()
    decay_path = os.path.join(outdir, f"{prefix}_decay.png")
    fig.savefig(decay_path, dpi=120)
    plt.close(fig)
    paths.append(decay_path)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for key, prof in report.profiles.items():
        if prof is None:
            continue
        bp = prof.breakpoints
        vals = np.maximum(prof.values, 1e-300)
        ax.step(bp, vals, where="post", label=f"{key} ({prof.kind})")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("mass budget r")
    ax.set_ylabel("profile value")
    ax.set_title(f"{report.name}: profiles")
    ax.legend(fontsize=8)
    fig.tight_layout()
    prof_path = os.path.join(outdir, f"{prefix}_profiles.png")
    fig.savefig(prof_path, dpi=120)
    plt.close(fig)
    paths.append(prof_path)
    return paths


def write_report(chain, name, outdir, opts=None):
    """Build a report and write CSV + JSON (+ figures) into outdir."""
    opts = opts or ReportOptions()
    os.makedirs(outdir, exist_ok=True)
    report = build_report(chain, name=name, opts=opts)
    base = os.path.join(outdir, name)
    with open(base + "_report.csv", "w", encoding="utf-8") as fh:
        fh.write(report.csv())
    with open(base + "_report.json", "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    written = [base + "_report.csv", base + "_report.json"]
    if opts.figures:
        try:
            written.extend(render_figures(chain, report, outdir, name))
        except SpkError:
            pass
    return report, written
