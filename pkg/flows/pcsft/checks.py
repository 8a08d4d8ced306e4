"""Contrôles de tolérance et rapports de vérification"""

from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from .dequantization import AsymptoticsReport, TraceCheck
from .dynamics.fields import plane_wave, plane_wave_wavenumber
from .dynamics.integrators import Trajectory
from .phase_space import PhaseSpace


def _status(ok: bool) -> str:
    return "✅" if ok else "❌"


def check_trajectory(trajectory: Trajectory, rules: Dict[str, float], name: str = "trajectory") -> Dict[str, Any]:
    """
    Valide une trajectoire selon des tolérances.

    Args:
        trajectory: Trajectoire intégrée
        rules: {"norm_drift": tol, "energy_drift": tol}
        name: Nom pour le rapport

    Returns:
        Dict avec résultats des contrôles
    """
    report = {"name": name, "samples": len(trajectory.times), "checks": {}}
    measures = {"norm_drift": trajectory.norm_drift, "energy_drift": trajectory.energy_drift}
    for key, threshold in rules.items():
        if key in measures:
            value = measures[key]()
            report["checks"][key] = {
                "value": value,
                "threshold": threshold,
                "status": _status(np.isfinite(value) and value <= threshold),
            }
    return report


def add_check(report: Dict[str, Any], key: str, value: float, threshold: float, details: str = "") -> Dict[str, Any]:
    """Ajoute un contrôle « value ≤ threshold » à un rapport existant."""
    report["checks"][key] = {
        "value": float(value),
        "threshold": threshold,
        "status": _status(bool(np.isfinite(value) and value <= threshold)),
    }
    if details:
        report["checks"][key]["details"] = details
    return report


def check_asymptotics(report: AsymptoticsReport, slope_range=(1.8, 2.2)) -> Dict[str, Any]:
    low, high = slope_range
    result = {"name": f"asymptotics ({report.path})", "samples": len(report.alphas), "checks": {}}
    if report.status == "exact":
        result["checks"]["remainder"] = {
            "value": float(np.abs(report.remainder).max()),
            "threshold": 0.0,
            "status": "✅",
            "details": "reste exactement nul (variable quadratique)",
        }
        return result
    result["checks"]["slope"] = {
        "value": report.fitted_slope,
        "threshold": f"[{low}, {high}]",
        "status": _status(report.slope_within(low, high)),
        "details": f"{report.fit_points} points ajustés",
    }
    return result


def check_trace(results: List[TraceCheck], sigmas: float = 4.0) -> Dict[str, Any]:
    report = {"name": "trace formula", "samples": len(results), "checks": {}}
    for index, result in enumerate(results):
        report["checks"][f"trial_{index}"] = {
            "value": abs(result.z_score),
            "threshold": sigmas,
            "status": _status(result.passed),
            "details": f"MC={result.monte_carlo.value:.6g} analytique={result.analytic:.6g}",
        }
    return report


def report_passed(report: Dict[str, Any]) -> bool:
    return all(check["status"] == "✅" for check in report["checks"].values())


def plane_wave_phase_error(
    trajectory: Trajectory,
    space: PhaseSpace,
    amplitude: float,
    mode: int,
    alpha_c: float,
    kinetic: float = 0.5,
) -> float:
    """
    Erreur de phase relative finale contre A·e^{i(kx − ωt)}, ω = κk² + α_c·A².

    Rapportée à |ωt| (ou 1 si la phase totale est plus petite).
    """
    k = plane_wave_wavenumber(space, mode)
    omega = kinetic * k ** 2 + alpha_c * amplitude ** 2
    t = trajectory.times[-1]
    exact = plane_wave(space, amplitude, mode) * np.exp(-1j * omega * t)
    phase = np.angle(trajectory.final * np.conj(exact))
    return float(np.abs(phase).max() / max(abs(omega * t), 1.0))


def profile_deviation(trajectory: Trajectory, reference: Optional[np.ndarray] = None) -> float:
    """max_t ‖|Ψ(t)| − |Ψ_ref|‖₂ / ‖Ψ_ref‖₂ (référence : l'état initial)."""
    reference = np.abs(trajectory.states[0] if reference is None else reference)
    scale = np.linalg.norm(reference)
    return float(max(np.linalg.norm(np.abs(state) - reference) for state in trajectory.states) / scale)


def mode_errors(trajectory: Trajectory, frequencies: np.ndarray, alpha_c: float) -> Tuple[float, float]:
    """
    Bilinéaire à Γ1 = Γ2 = I et Hlin diagonal : |Ψ_k| constants, phases à ω_k + α_c‖Ψ0‖².

    Returns:
        (dérive d'amplitude relative, erreur de phase absolue finale)
    """
    psi0 = trajectory.states[0]
    shift = alpha_c * float(np.sum(np.abs(psi0) ** 2))
    amplitude = max(np.abs(np.abs(state) - np.abs(psi0)).max() for state in trajectory.states)
    exact = psi0 * np.exp(-1j * (np.asarray(frequencies) + shift) * trajectory.times[-1])
    mask = np.abs(psi0) > 0
    phase = np.angle(trajectory.final[mask] * np.conj(exact[mask]))
    return float(amplitude / np.abs(psi0).max()), float(np.abs(phase).max(initial=0.0))


def generate_check_report(reports: Iterable[Dict[str, Any]]) -> None:
    """
    Affiche un rapport de vérification formaté.

    Args:
        reports: Rapports issus des fonctions check_*
    """
    print("\n" + "=" * 60)
    print("📋 RAPPORT DE VÉRIFICATION")
    print("=" * 60)

    for report in reports:
        print(f"\n📊 {report['name']} ({report.get('samples', 0)} échantillons)")
        for check_name, check in report["checks"].items():
            value = check.get("value", 0.0)
            shown = f"{value:.3e}" if isinstance(value, float) else str(value)
            print(f"   {check['status']} {check_name}: {shown} (seuil: {check.get('threshold')})")
            if check.get("details"):
                print(f"      → {check['details']}")

    print("\n" + "=" * 60 + "\n")
