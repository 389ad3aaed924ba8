"""Nonlinear connection, Chern connection coefficients, and classification.

Classification verdicts (Berwald / Landsberg / locally Minkowski) are
sup-norm residual tests over the sampled points only; the report says so and
carries the worst offender for each condition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OrderError
from .frame import Frame, jet_dy_values, jet_values
from .jets import BasePoint, Jet
from .metrics import FinslerStructure, TensorBlock
from .report import CheckReport, CheckRow
from .tolerances import Tolerances


@dataclass(frozen=True)
class ChernData:
    """Nonlinear connection N^i_m and connection coefficients Gamma^i_jk."""

    nonlinear: TensorBlock
    gamma: TensorBlock
    base: BasePoint


def _frame(structure, p, frame):
    return frame if frame is not None else Frame(structure, p)


def nonlinear_connection(structure: FinslerStructure, p: BasePoint,
                         frame: Frame | None = None) -> TensorBlock:
    """N^i_m from the y-derivative of the geodesic-spray quadratic form."""
    fr = _frame(structure, p, frame)
    return TensorBlock(fr.nonlinear_values, ("u", "d"), fr.base,
                       jets=fr.nonlinear_jets)


def delta_x(structure: FinslerStructure, p: BasePoint, field, i: int,
            frame: Frame | None = None):
    """Apply the horizontal basis vector delta/delta x^i to a jet (or jet array).

    Returns the scalar value for a single jet, or an ndarray for an object
    array of jets.  Raises OrderError when the field has no x- or y-order left.
    """
    fr = _frame(structure, p, frame)
    if isinstance(field, Jet):
        arr = np.array([field], dtype=object)
        return float(fr.horiz_values(arr)[0, i])
    return fr.horiz_values(np.asarray(field, dtype=object))[..., i]


def chern_gamma(structure: FinslerStructure, p: BasePoint,
                frame: Frame | None = None) -> ChernData:
    fr = _frame(structure, p, frame)
    gamma = TensorBlock(fr.gamma_values, ("u", "d", "d"), fr.base,
                        ("symmetric in lower pair",), jets=fr.gamma_jets)
    return ChernData(nonlinear_connection(structure, p, fr), gamma, fr.base)


def gamma_vertical(structure: FinslerStructure, p: BasePoint,
                   frame: Frame | None = None) -> TensorBlock:
    """d Gamma^i_jk / dy^h; identically zero exactly for Berwald structures."""
    fr = _frame(structure, p, frame)
    return TensorBlock(fr.gamma_vertical_values, ("u", "d", "d", "d"), fr.base,
                       ("symmetric in slots 1,2",))


def hcov_cartan(structure: FinslerStructure, p: BasePoint,
                frame: Frame | None = None) -> TensorBlock:
    """Horizontal covariant derivative A^i_jl|s of the mixed Cartan tensor."""
    fr = _frame(structure, p, frame)
    return TensorBlock(jet_values(fr.cartan_hcov_jets), ("u", "d", "d", "d"),
                       fr.base, jets=fr.cartan_hcov_jets)


def adot(structure: FinslerStructure, p: BasePoint,
         frame: Frame | None = None) -> TensorBlock:
    """Adot^i_jl = A^i_jl|s l^s (the Landsberg tensor, mixed form)."""
    fr = _frame(structure, p, frame)
    return TensorBlock(fr.adot_values, ("u", "d", "d"), fr.base,
                       ("symmetric in lower pair",), jets=fr.adot_jets)


# -- residual helpers shared with the CLI and the symmetry audits ---------------

def metricity_residual(fr: Frame) -> float:
    """Horizontal metric compatibility: delta_s g_ij - Gamma g - Gamma g."""
    dg = fr.horiz_values(fr.metric_jets)
    G = fr.gamma_values
    gv = fr.metric_values
    res = dg - np.einsum("mis,mj->ijs", G, gv) - np.einsum("mjs,im->ijs", G, gv)
    return float(np.abs(res).max())


def vertical_compat_residual(fr: Frame) -> float:
    """Vertical compatibility: F dg_ij/dy^s = 2 A_ijs."""
    dgy = jet_dy_values(fr.metric_jets, fr.n)
    res = fr.norm_jet.value * dgy - 2.0 * fr.cartan_lowered_values
    return float(np.abs(res).max())


def horizontal_norm_residual(fr: Frame) -> float:
    """|delta F / delta x|: the norm must be horizontally constant."""
    arr = np.array([fr.norm_jet], dtype=object)
    return float(np.abs(fr.horiz_values(arr)).max())


def torsion_residual(fr: Frame) -> float:
    G = fr.gamma_values
    return float(np.abs(G - np.transpose(G, (0, 2, 1))).max())


def connection_homogeneity_residual(structure: FinslerStructure, fr: Frame,
                                    lam: float = 2.0) -> float:
    """N is degree 1 and Gamma degree 0 in y; compare against a scaled fiber."""
    scaled = Frame(structure, fr.base.with_y_scaled(lam), 1, 3)
    rn = np.abs(scaled.nonlinear_values - lam * fr.nonlinear_values).max()
    rg = np.abs(scaled.gamma_values - fr.gamma_values).max()
    return float(max(rn, rg))


def minkowski_residual(fr: Frame) -> float:
    """sup |dF/dx| at the point: zero in a natural locally Minkowski chart."""
    return float(max(abs(fr.norm_jet.dvalue_x(i)) for i in range(fr.n)))


def classify(structure: FinslerStructure, samples, tol: float | None = None,
             tolerances: Tolerances | None = None, frames=None,
             check_identities: bool = True) -> CheckReport:
    """Berwald / Landsberg / locally Minkowski classification at the samples.

    berwald            <=>  sup |dGamma/dy|  < tol
    landsberg          <=>  sup |Adot|       < tol
    locally_minkowski  <=>  sup |dF/dx|      < tol

    Classification outcomes are measurements, not failures: their rows never
    carry a FAIL verdict, and the booleans land in
    ``report.provenance["classifications"]``.  The connection identities
    (torsion-freeness, metric compatibility, horizontal constancy of F,
    homogeneity of N and Gamma) are genuine PASS/FAIL rows.
    """
    samples = list(samples)
    tols = tolerances or Tolerances()
    if tol is None:
        tol = tols.classification
    class_worst = {"berwald": (0.0, None), "landsberg": (0.0, None),
                   "locally_minkowski": (0.0, None)}
    ident_worst = {"torsion": (0.0, None), "metricity": (0.0, None),
                   "vertical_compat": (0.0, None), "horizontal_F": (0.0, None),
                   "connection_homogeneity": (0.0, None)}

    for idx, p in enumerate(samples):
        fr = frames[idx] if frames is not None else Frame(structure, p)
        measured = {
            "berwald": float(np.abs(fr.gamma_vertical_values).max()),
            "landsberg": float(np.abs(fr.adot_values).max()),
            "locally_minkowski": minkowski_residual(fr),
        }
        for key, val in measured.items():
            if val > class_worst[key][0]:
                class_worst[key] = (val, idx)
        if check_identities:
            idents = {
                "torsion": torsion_residual(fr),
                "metricity": metricity_residual(fr),
                "vertical_compat": vertical_compat_residual(fr),
                "horizontal_F": horizontal_norm_residual(fr),
                "connection_homogeneity":
                    connection_homogeneity_residual(structure, fr),
            }
            for key, val in idents.items():
                if val > ident_worst[key][0]:
                    ident_worst[key] = (val, idx)

    rows = []
    booleans = {}
    for key, (res, idx) in class_worst.items():
        holds = res < tol
        booleans[key] = holds
        rows.append(CheckRow(
            name=f"classify.{key}", residual=res, tol=tol, verdict="PASS",
            worst_sample=idx,
            note=("holds" if holds else "does not hold") + " at the sampled points",
        ))
    if check_identities:
        ident_tols = {
            "torsion": 1e-15,
            "metricity": tols.metricity,
            "vertical_compat": tols.vertical_compat,
            "horizontal_F": tols.horizontal_F,
            "connection_homogeneity": tols.connection_homogeneity,
        }
        for key, (res, idx) in ident_worst.items():
            rows.append(CheckRow(
                name=f"connection.{key}", residual=res, tol=ident_tols[key],
                verdict="PASS" if res < ident_tols[key] else "FAIL",
                worst_sample=idx,
            ))
    report = CheckReport.single_section("classify", rows, len(samples))
    report.provenance["classifications"] = booleans
    return report
