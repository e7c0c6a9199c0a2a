"""End-to-end analysis of one click-data set."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from . import __version__
from .cbd import CbdReport, delta_min
from .estimation import SignalingReport, pooled_system, signaling_report, system_from_counts
from .inequalities import BdkReport, ChshReport, FineResult, bdk, chsh, jpd_feasible
from .probability import CHSH_CONTEXTS, CyclicSystem

FINE_SKIPPED = "skipped: signaling"
DEFAULT_ALPHA = 0.01


@dataclass(frozen=True)
class AnalysisReport:
    system: CyclicSystem
    signaling: SignalingReport
    chsh: ChshReport
    bdk: BdkReport
    fine: FineResult | str
    cbd: CbdReport
    provenance: dict

    def to_dict(self, include_coupling: bool = False) -> dict:
        return {
            "system": self.system.to_dict(),
            "signaling": self.signaling.to_dict(),
            "chsh": self.chsh.to_dict(),
            "bdk": self.bdk.to_dict(),
            "fine": self.fine if isinstance(self.fine, str) else self.fine.to_dict(),
            "cbd": self.cbd.to_dict(include_coupling),
            "provenance": self.provenance,
        }


def _fine_verdict(system, counts, signaling, alpha, force_fine):
    if signaling.p_values is not None and signaling.min_p_value() < alpha and not force_fine:
        return FINE_SKIPPED
    target = system
    if counts is not None:
        # sampling noise makes empirical marginals differ slightly; test the pooled projection
        target = pooled_system(counts)
    elif signaling.delta0 > 1e-9:
        return FINE_SKIPPED
    return jpd_feasible(target)


def analyze_system(
    system: CyclicSystem,
    counts: Mapping | None = None,
    alpha: float = DEFAULT_ALPHA,
    force_fine: bool = False,
    provenance: dict | None = None,
) -> AnalysisReport:
    signaling = signaling_report(system, counts)
    return AnalysisReport(
        system=system,
        signaling=signaling,
        chsh=chsh(system),
        bdk=bdk(system, signaling),
        fine=_fine_verdict(system, counts, signaling, alpha, force_fine),
        cbd=delta_min(system),
        provenance=provenance or {"tool_version": __version__},
    )


def analyze_counts(counts, alpha=DEFAULT_ALPHA, force_fine=False, provenance=None) -> AnalysisReport:
    return analyze_system(system_from_counts(counts), counts, alpha, force_fine, provenance)


def file_provenance(csv_path) -> dict:
    csv_path = Path(csv_path)
    prov = {
        "input": str(csv_path),
        "input_sha256": hashlib.sha256(csv_path.read_bytes()).hexdigest(),
        "tool_version": __version__,
        "config_hash": None,
        "config": None,
    }
    meta = csv_path.with_suffix(".json")
    if meta.exists():
        try:
            data = json.loads(meta.read_text())
            prov["config_hash"] = data.get("config_hash")
            prov["config"] = data.get("config")
        except (json.JSONDecodeError, AttributeError):
            pass
    return prov


def format_text(report: AnalysisReport) -> str:
    out = []
    sig = report.signaling
    out.append("context  n_trials   mean_a    mean_b    corr     theta    phi      -cos2(theta-phi)")
    config = report.provenance.get("config") or {}
    angles_a = config.get("angles_a")
    angles_b = config.get("angles_b")
    for i, j in CHSH_CONTEXTS:
        st = report.system[(i, j)]
        line = f"C{i}{j}     {st.n_trials:8d}  {st.mean_a:+.4f}  {st.mean_b:+.4f}  {st.corr:+.4f}"
        if angles_a and angles_b:
            th, ph = angles_a[i - 1], angles_b[j - 1]
            line += f"  {th:+.4f}  {ph:+.4f}  {-math.cos(2 * (th - ph)):+.4f}"
        out.append(line)
    out.append("")
    names = ("a1", "a2", "b1", "b2")
    deltas = list(sig.delta_a) + list(sig.delta_b)
    for k, name in enumerate(names):
        line = f"delta({name}) = {deltas[k]:+.5f}"
        if sig.p_values is not None:
            line += f"  z = {sig.z_scores[k]:+.3f}  p = {sig.p_values[k]:.3g}"
        out.append(line)
    out.append(f"delta0 = {sig.delta0:.6f}")
    out.append("")
    out.append("CHSH values: " + ", ".join(f"{v:.5f}" for v in report.chsh.values))
    out.append(f"s_max = {report.chsh.s_max:.6f}  satisfied = {report.chsh.satisfied}")
    out.append(f"BDK lhs = {report.bdk.lhs:.6f}  contextual = {report.bdk.contextual}")
    fine = report.fine if isinstance(report.fine, str) else ("feasible" if report.fine.feasible else "infeasible")
    out.append(f"joint distribution: {fine}")
    c = report.cbd
    out.append(
        f"CbD: delta_min = {c.delta_min:.6f}  delta0 = {c.delta0:.6f}  genuine = {c.genuine:.6f}  contextual = {c.contextual}"
    )
    return "\n".join(out) + "\n"
