"""hh/hv curvature, contractions, the D-tensor, and flag curvature.

Index conventions (also echoed in report headers):

* ``R^i_kl = l^j R^i_jkl`` and ``R^i_j = R^i_jl l^l``, the flag-curvature
  predecessor; with these, constant flag curvature lambda is equivalent to
  ``R^i_kl = lambda (delta^i_k l_l - delta^i_l l_k)``.
* The reconstruction identity is carried in its degree-homogeneous form
  ``R^i_hkl = d/dy^h (y^j R^i_jkl) + D^i_hkl``; note ``y^j R^i_jkl = F R^i_kl``.
  The variant with the bare contraction in the derivative is not homogeneous
  in y and fails off quadratic norms; its residual is still reported for
  reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFlagError
from .frame import Frame, jet_values
from .jets import BasePoint
from .metrics import FinslerStructure, TensorBlock
from .report import CheckReport, CheckRow
from .tolerances import Tolerances

EPS_FLAG = 1e-10


@dataclass(frozen=True)
class CurvatureData:
    """Curvature tensors of one structure at one base point."""

    hh: TensorBlock            # R^i_jkl
    hv: TensorBlock            # P^i_jkl
    contracted: TensorBlock    # R^i_kl
    predecessor: TensorBlock   # R^i_j
    trace_pair: np.ndarray     # R_kh = R^i_ikh
    trace_single: np.ndarray   # R_k = R^i_ik
    scalar: float              # R with R^i_i = (n-1) R
    d_tensor: TensorBlock      # D^i_hkl
    base: BasePoint


def _frame(structure, p, frame):
    return frame if frame is not None else Frame(structure, p)


def hh_curvature(structure: FinslerStructure, p: BasePoint,
                 frame: Frame | None = None) -> TensorBlock:
    fr = _frame(structure, p, frame)
    return TensorBlock(fr.hh_values, ("u", "d", "d", "d"), fr.base,
                       ("antisymmetric in last pair",), jets=fr.hh_jets)


def hv_curvature(structure: FinslerStructure, p: BasePoint,
                 frame: Frame | None = None) -> TensorBlock:
    fr = _frame(structure, p, frame)
    return TensorBlock(fr.hv_values, ("u", "d", "d", "d"), fr.base,
                       ("symmetric in slots 1,2",))


def contract_R(structure: FinslerStructure, p: BasePoint,
               frame: Frame | None = None):
    """(R^i_kl, R^i_j) by contraction with the distinguished section."""
    fr = _frame(structure, p, frame)
    r3 = TensorBlock(fr.r3_values, ("u", "d", "d"), fr.base,
                     ("antisymmetric in lower pair",), jets=fr.r3_jets)
    r2 = TensorBlock(fr.r2_values, ("u", "d"), fr.base)
    return r3, r2


def traces(structure: FinslerStructure, p: BasePoint,
           frame: Frame | None = None):
    """(R_kh, R_k, scalar) with R^i_ikh, R^i_ik and R^i_i = (n-1) scalar."""
    fr = _frame(structure, p, frame)
    return fr.traces()


def d_tensor(structure: FinslerStructure, p: BasePoint,
             frame: Frame | None = None) -> TensorBlock:
    """D^i_hkl = y^j d/dy^h of the Adot commutator bracket."""
    fr = _frame(structure, p, frame)
    return TensorBlock(fr.d_values, ("u", "d", "d", "d"), fr.base,
                       ("antisymmetric in last pair",))


def antisymmetry_residual(fr: Frame) -> float:
    R = fr.hh_values
    return float(np.abs(R + np.transpose(R, (0, 1, 3, 2))).max())


def reconstruction_residuals(fr: Frame):
    """(adopted, literal) residuals of rebuilding R^i_hkl from its contraction.

    adopted: sup |R^i_hkl - d/dy^h (y^j R^i_jkl) - D^i_hkl|
    literal: same with d/dy^h R^i_kl in place of the fiber-weighted term.
    """
    n = fr.n
    R4 = fr.hh_values
    D = fr.d_values
    mid = np.empty((n, n, n, n))
    mid_lit = np.empty((n, n, n, n))
    FW = fr.fiber_weighted_r3_jets
    R3 = fr.r3_jets
    for i in range(n):
        for k in range(n):
            for l in range(n):
                for h in range(n):
                    mid[i, h, k, l] = FW[i, k, l].dvalue_y(h)
                    mid_lit[i, h, k, l] = R3[i, k, l].dvalue_y(h)
    adopted = float(np.abs(R4 - mid - D).max())
    literal = float(np.abs(R4 - mid_lit - D).max())
    return adopted, literal


def reconstruct_hh(structure: FinslerStructure, p: BasePoint,
                   frame: Frame | None = None,
                   tolerances: Tolerances | None = None) -> CheckReport:
    """Consistency check: R^i_hkl recovered from d/dy^h(y^j R^i_jkl) + D^i_hkl.

    The three ingredients come from separate derivative chains (connection
    side for R, Cartan side for D), which makes this the strongest internal
    cross-check of the curvature module.
    """
    fr = _frame(structure, p, frame)
    tol = (tolerances or Tolerances()).reconstruction
    adopted, literal = reconstruction_residuals(fr)
    rows = [
        CheckRow(name="curvature.reconstruction", residual=adopted, tol=tol,
                 verdict="PASS" if adopted < tol else "FAIL"),
        CheckRow(name="curvature.reconstruction_unweighted", residual=literal,
                 tol=tol, verdict="PASS",
                 note="reference only: variant without the F-weight"),
    ]
    return CheckReport.single_section("reconstruct_hh", rows, 1)


def curvature_data(structure: FinslerStructure, p: BasePoint,
                   frame: Frame | None = None) -> CurvatureData:
    fr = _frame(structure, p, frame)
    r3, r2 = contract_R(structure, p, fr)
    R_kh, R_k, scalar = fr.traces()
    return CurvatureData(
        hh=hh_curvature(structure, p, fr),
        hv=hv_curvature(structure, p, fr),
        contracted=r3,
        predecessor=r2,
        trace_pair=R_kh,
        trace_single=R_k,
        scalar=scalar,
        d_tensor=d_tensor(structure, p, fr),
        base=fr.base,
    )


# -- constant flag curvature -----------------------------------------------------

def _flag_basis(fr: Frame) -> np.ndarray:
    """delta^i_k l_l - delta^i_l l_k at the frame's point."""
    n = fr.n
    l_dn = fr.unit_fiber_lowered
    eye = np.eye(n)
    return np.einsum("ik,l->ikl", eye, l_dn) - np.einsum("il,k->ikl", eye, l_dn)


def constant_flag_fit(structure: FinslerStructure, samples, frames=None,
                      tolerances: Tolerances | None = None):
    """Least-squares lambda in R^i_kl ~ lambda (delta^i_k l_l - delta^i_l l_k).

    Returns (lambda, residual) with residual the sup-norm misfit over all
    components and samples.  A degenerate design (flat structure) yields
    lambda = 0 with residual = sup |R^i_kl|.
    """
    samples = list(samples)
    if len(samples) < 1:
        raise ValueError("constant_flag_fit needs at least one sample")
    num = 0.0
    den = 0.0
    pairs = []
    for idx, p in enumerate(samples):
        fr = frames[idx] if frames is not None else Frame(structure, p)
        basis = _flag_basis(fr)
        r3 = fr.r3_values
        num += float((basis * r3).sum())
        den += float((basis * basis).sum())
        pairs.append((r3, basis))
    lam = 0.0 if den < 1e-30 else num / den
    residual = 0.0
    for r3, basis in pairs:
        residual = max(residual, float(np.abs(r3 - lam * basis).max()))
    return lam, residual


def flag_curvature(structure: FinslerStructure, p: BasePoint, u,
                   frame: Frame | None = None) -> float:
    """Flag curvature of the flag spanned by (y, u) with pole y.

    K = R_ik u^i u^k / (g(u,u) - (l_i u^i)^2) with R_ik = g_ij R^j_kl l^l.
    Raises DegenerateFlagError when u is numerically parallel to y.
    """
    fr = _frame(structure, p, frame)
    u = np.asarray(u, dtype=float)
    g = fr.metric_values
    l_dn = fr.unit_fiber_lowered
    denom = float(u @ g @ u - (l_dn @ u) ** 2)
    if denom <= EPS_FLAG:
        raise DegenerateFlagError(
            f"flag edge parallel to the pole (denominator {denom:.3e})")
    r2 = fr.r2_values
    R_low = g @ r2
    return float(u @ R_low @ u) / denom
