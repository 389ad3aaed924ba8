"""Parallel-curvature certification and the symmetric-space audit chain.

The central object is the horizontal covariant derivative ``nabla_p`` acting
on curvature-type tensors.  The checks:

* defn1:  sup |nabla_p R^i_jkl|            (parallel hh-curvature)
* eq1:    sup |nabla_h R^i_kl|             (parallel contracted curvature)
* eq2:    sup |nabla_p D^i_hkl|            (parallel D-tensor)
* eq3:    commutation-formula misfit, both sides computed independently
* eq4:    sup-norm of the commutation right-hand side alone

The commutation formula used here (verified to rounding on all built-in
families, with the derivative slot h treated as a full tensor index):

    d/dy^h nabla_p R^i_kl - nabla_p d/dy^h R^i_kl
        = - (dR^i_kl/dy^m) Adot^m_hp
          + R^m_kl G^i_mph - R^i_ml G^m_kph - R^i_km G^m_lph

where G^i_mph = d Gamma^i_mp / dy^h.  eq4 is the vanishing of that right-hand
side, the second symmetric-space condition for spaces with parallel D.

Certification is pointwise: every verdict is "at the sampled points", with
the worst offender recorded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .connection import classify
from .curvature import constant_flag_fit
from .errors import OrderError
from .frame import Frame, jet_dy_values, jet_values, _oarray
from .jets import BasePoint
from .metrics import FinslerStructure, TensorBlock
from .report import CheckReport, CheckRow, TheoremRow
from .tolerances import Tolerances

NABLA_D_FD_STEP = 1e-4


@dataclass
class SymmetryReport:
    """Residuals, verdicts and provenance of the symmetric-space certification."""

    residual_defn1: float
    residual_eq1: float
    residual_eq2: float
    residual_eq3: float
    residual_eq4: float
    classifications: dict
    flag: tuple  # (lambda, misfit residual)
    verdicts: dict
    tolerances: dict
    worst_samples: dict
    modes: dict
    sample_count: int

    @property
    def symmetric(self) -> bool:
        return self.verdicts["defn1"]

    def as_dict(self) -> dict:
        return {
            "residuals": {
                "defn1": self.residual_defn1,
                "eq1": self.residual_eq1,
                "eq2": self.residual_eq2,
                "eq3": self.residual_eq3,
                "eq4": self.residual_eq4,
            },
            "classifications": self.classifications,
            "flag": {"lambda": self.flag[0], "residual": self.flag[1]},
            "verdicts": self.verdicts,
            "tolerances": self.tolerances,
            "worst_samples": self.worst_samples,
            "modes": self.modes,
            "sample_count": self.sample_count,
        }


def _frame(structure, p, frame):
    return frame if frame is not None else Frame(structure, p)


def hcov(structure: FinslerStructure, p: BasePoint, block: TensorBlock,
         frame: Frame | None = None) -> TensorBlock:
    """Horizontal covariant derivative of a tensor block (one extra down index).

    The block must carry jet components (as produced by the tensor operations
    in this package) so the delta/delta-x term can be taken without re-deriving
    the field at displaced points.
    """
    if block.jets is None:
        raise OrderError(
            "hcov needs jet-valued components; request the tensor from its "
            "producing operation (they attach jets) or use the named checks")
    fr = _frame(structure, p, frame)
    values = fr.hcov_values(block.jets, block.valence)
    return TensorBlock(values, block.valence + ("d",), fr.base)


# -- per-sample residuals -------------------------------------------------------

def defn1_residual(fr: Frame) -> float:
    return float(np.abs(fr.hcov_values(fr.hh_jets, ("u", "d", "d", "d"))).max())


def eq1_residual(fr: Frame) -> float:
    return float(np.abs(fr.hcov_values(fr.r3_jets, ("u", "d", "d"))).max())


def nabla_d(structure: FinslerStructure, fr: Frame,
            step: float = NABLA_D_FD_STEP):
    """(nabla_p D^i_hkl, mode) with mode "ad" or "fd".

    Pure jet arithmetic needs y_order >= 7.  At the default orders the
    outermost horizontal derivative is taken by central differences in x of
    the fully-AD D-tensor along the horizontal lift (y displaced by -t N_p),
    Richardson-extrapolated over steps h and h/2; the covariant correction
    terms are exact values from the frame.
    """
    n = fr.n
    if fr.deep_ad_available:
        return fr.hcov_values(fr.d_jets, ("u", "d", "d", "d")), "ad"

    Nv = fr.nonlinear_values
    D0 = fr.d_values
    yo = fr.space.y_order
    delta = np.empty((n,) * 4 + (n,))
    for q in range(n):
        ex = np.zeros(n)
        ex[q] = 1.0
        slopes = []
        for h in (step, step / 2.0):
            fp = Frame(structure, fr.base.displaced(dx=h * ex, dy=-h * Nv[:, q]),
                       2, yo)
            fm = Frame(structure, fr.base.displaced(dx=-h * ex, dy=h * Nv[:, q]),
                       2, yo)
            slopes.append((fp.d_values - fm.d_values) / (2.0 * h))
        delta[..., q] = (4.0 * slopes[1] - slopes[0]) / 3.0
    G = fr.gamma_values
    corr = (np.einsum("imp,mhkl->ihklp", G, D0)
            - np.einsum("mhp,imkl->ihklp", G, D0)
            - np.einsum("mkp,ihml->ihklp", G, D0)
            - np.einsum("mlp,ihkm->ihklp", G, D0))
    return delta + corr, "fd"


def eq2_residual(structure: FinslerStructure, fr: Frame):
    values, mode = nabla_d(structure, fr)
    return float(np.abs(values).max()), mode


def commutation_rhs(fr: Frame) -> np.ndarray:
    """RHS of the commutation formula, indexed [i, k, l, h, p]."""
    dR3 = jet_dy_values(fr.r3_jets, fr.n)
    Ad = fr.adot_values
    Gv = fr.gamma_vertical_values
    R3 = fr.r3_values
    return (-np.einsum("iklm,mhp->iklhp", dR3, Ad)
            + np.einsum("mkl,imph->iklhp", R3, Gv)
            - np.einsum("iml,mkph->iklhp", R3, Gv)
            - np.einsum("ikm,mlph->iklhp", R3, Gv))


def commutation_lhs(fr: Frame) -> np.ndarray:
    """LHS of the commutation formula, each side from its own derivative chain."""
    n = fr.n
    nab_r3 = fr.hcov_jets(fr.r3_jets, ("u", "d", "d"))  # [i,k,l,p] jets
    term1 = np.empty((n,) * 5)  # [i,k,l,h,p]
    for idx in np.ndindex((n, n, n, n)):
        i, k, l, p = idx
        jt = nab_r3[i, k, l, p]
        for h in range(n):
            term1[i, k, l, h, p] = jt.dvalue_y(h)
    T = _oarray((n, n, n, n))  # [i,h,k,l] = d/dy^h R^i_kl as jets
    for i in range(n):
        for k in range(n):
            for l in range(n):
                jt = fr.r3_jets[i, k, l]
                for h in range(n):
                    T[i, h, k, l] = jt.dy(h)
    term2 = fr.hcov_values(T, ("u", "d", "d", "d"))  # [i,h,k,l,p]
    return term1 - np.transpose(term2, (0, 2, 3, 1, 4))


def eq3_residual(fr: Frame) -> float:
    return float(np.abs(commutation_lhs(fr) - commutation_rhs(fr)).max())


def eq4_residual(fr: Frame) -> float:
    return float(np.abs(commutation_rhs(fr)).max())


# -- sample sweeps ---------------------------------------------------------------

def _sweep(residual_fn, samples, frames):
    worst, at = 0.0, None
    for idx, p in enumerate(samples):
        fr = frames[idx]
        val = residual_fn(fr)
        if val > worst:
            worst, at = val, idx
    return worst, at


def _ensure_frames(structure, samples, frames, x_order=None, y_order=None):
    if frames is not None:
        return frames
    return [Frame(structure, p, x_order, y_order) for p in samples]


def check_eq1(structure, samples, frames=None):
    samples = list(samples)
    frames = _ensure_frames(structure, samples, frames)
    return _sweep(eq1_residual, samples, frames)[0]


def check_eq2(structure, samples, frames=None):
    samples = list(samples)
    frames = _ensure_frames(structure, samples, frames)
    worst, at, mode = 0.0, None, "ad"
    for idx, p in enumerate(samples):
        val, mode = eq2_residual(structure, frames[idx])
        if val > worst:
            worst, at = val, idx
    return worst


def check_eq4(structure, samples, frames=None):
    samples = list(samples)
    frames = _ensure_frames(structure, samples, frames)
    return _sweep(eq4_residual, samples, frames)[0]


def commutation_residual(structure, samples, frames=None):
    samples = list(samples)
    frames = _ensure_frames(structure, samples, frames)
    return _sweep(eq3_residual, samples, frames)[0]


def certify_symmetric(structure: FinslerStructure, samples,
                      tolerances: Tolerances | None = None,
                      frames=None) -> SymmetryReport:
    """Full symmetric-space certification over the sampled points."""
    samples = list(samples)
    tols = tolerances or Tolerances()
    frames = _ensure_frames(structure, samples, frames)

    worst = {}
    modes = {"defn1": "ad", "eq1": "ad", "eq3": "ad", "eq4": "ad"}
    r_defn1 = _sweep(defn1_residual, samples, frames)
    r_eq1 = _sweep(eq1_residual, samples, frames)
    r_eq3 = _sweep(eq3_residual, samples, frames)
    r_eq4 = _sweep(eq4_residual, samples, frames)
    r_eq2, at2, mode2 = 0.0, None, "ad"
    for idx in range(len(samples)):
        val, mode2 = eq2_residual(structure, frames[idx])
        if val > r_eq2:
            r_eq2, at2 = val, idx
    modes["eq2"] = mode2

    cls = classify(structure, samples, tolerances=tols, frames=frames,
                   check_identities=False)
    flag = constant_flag_fit(structure, samples, frames=frames, tolerances=tols)

    worst = {"defn1": r_defn1[1], "eq1": r_eq1[1], "eq2": at2,
             "eq3": r_eq3[1], "eq4": r_eq4[1]}
    residuals = {"defn1": r_defn1[0], "eq1": r_eq1[0], "eq2": r_eq2,
                 "eq3": r_eq3[0], "eq4": r_eq4[0]}
    tol_map = {"defn1": tols.defn1, "eq1": tols.eq1, "eq2": tols.eq2,
               "eq3": tols.eq3, "eq4": tols.eq4}
    verdicts = {k: residuals[k] < tol_map[k] for k in residuals}
    verdicts["constant_flag"] = flag[1] < tols.flag_fit

    return SymmetryReport(
        residual_defn1=residuals["defn1"],
        residual_eq1=residuals["eq1"],
        residual_eq2=residuals["eq2"],
        residual_eq3=residuals["eq3"],
        residual_eq4=residuals["eq4"],
        classifications=cls.provenance["classifications"],
        flag=flag,
        verdicts=verdicts,
        tolerances=tol_map | {"flag_fit": tols.flag_fit,
                              "classification": tols.classification},
        worst_samples=worst,
        modes=modes,
        sample_count=len(samples),
    )


# -- theorem audits ---------------------------------------------------------------

_IMPLICATIONS = (
    ("theorem1_forward", ("eq2", "defn1"), ("eq1", "eq4")),
    ("theorem1_reverse", ("eq2", "eq1", "eq4"), ("defn1",)),
    ("corollary1_forward", ("landsberg", "defn1"), ("eq1", "eq4")),
    ("corollary1_reverse", ("landsberg", "eq1", "eq4"), ("defn1",)),
    ("theorem2", ("berwald", "eq1"), ("defn1",)),
    ("theorem3", ("constant_flag", "dim_ge_3", "eq2", "eq4"), ("defn1",)),
    ("corollary2", ("landsberg", "constant_flag", "dim_ge_3", "eq4"), ("defn1",)),
    ("corollary3", ("berwald", "constant_flag", "dim_ge_3"), ("defn1",)),
)


def theorem_audit(structure: FinslerStructure, samples,
                  tolerances: Tolerances | None = None,
                  frames=None,
                  report: SymmetryReport | None = None) -> CheckReport:
    """Audit the symmetric-space implications on the sampled points.

    Each implication reports CONSISTENT (hypotheses hold and so does the
    conclusion), VACUOUS (some hypothesis fails), or VIOLATION (hypotheses
    hold, conclusion fails).  VIOLATION is never downgraded: it flags either a
    numerical artifact or a counterexample candidate for manual inspection.
    """
    samples = list(samples)
    tols = tolerances or Tolerances()
    if report is None:
        frames = _ensure_frames(structure, samples, frames)
        report = certify_symmetric(structure, samples, tols, frames)

    conditions = {
        "defn1": (report.residual_defn1, tols.defn1, report.verdicts["defn1"]),
        "eq1": (report.residual_eq1, tols.eq1, report.verdicts["eq1"]),
        "eq2": (report.residual_eq2, tols.eq2, report.verdicts["eq2"]),
        "eq4": (report.residual_eq4, tols.eq4, report.verdicts["eq4"]),
        "berwald": (0.0, tols.classification, report.classifications["berwald"]),
        "landsberg": (0.0, tols.classification, report.classifications["landsberg"]),
        "constant_flag": (report.flag[1], tols.flag_fit,
                          report.verdicts["constant_flag"]),
        "dim_ge_3": (0.0, 1.0, structure.n >= 3),
    }

    def entry(name):
        residual, tol, holds = conditions[name]
        return {"residual": residual, "tol": tol, "holds": bool(holds)}

    out = CheckReport(title="theorem audit")
    out.provenance["sample_count"] = len(samples)
    for name, hyps, concls in _IMPLICATIONS:
        hyp = {h: entry(h) for h in hyps}
        concl = {c: entry(c) for c in concls}
        if not all(e["holds"] for e in hyp.values()):
            status = "VACUOUS"
            note = ""
        elif all(e["holds"] for e in concl.values()):
            status = "CONSISTENT"
            note = ""
        else:
            status = "VIOLATION"
            bad = [c for c, e in concl.items() if not e["holds"]]
            note = (f"conclusion(s) {bad} fail with hypotheses satisfied; "
                    f"worst samples {report.worst_samples}")
        out.theorems.append(TheoremRow(name=name, status=status,
                                       hypotheses=hyp, conclusions=concl,
                                       note=note))
    return out
