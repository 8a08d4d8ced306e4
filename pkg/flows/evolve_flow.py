"""Flow de dynamique : intégration de i dΨ/dt = H′(Ψ) et contrôles de conservation"""

from typing import Any, Dict

import numpy as np
from prefect import flow, task

from config import PCSFT_DEFAULT_SEED, get_output_dir
from dequantize_flow import EXIT_FAILED, EXIT_NUMERICAL, EXIT_PASSED
from experiments import (
    EVOLVE_DEFAULTS,
    build_hamiltonian,
    build_initial,
    build_physical_hamiltonian,
    build_space,
    config_errors,
    config_hash,
    validate_config,
    with_defaults,
)
from pcsft.checks import (
    add_check,
    check_trajectory,
    generate_check_report,
    mode_errors,
    plane_wave_phase_error,
    profile_deviation,
    report_passed,
)
from pcsft.dynamics import BilinearHamiltonian, Trajectory, evolve
from pcsft.errors import BlowUpError, ConvergenceError, DimensionError, EvaluationError
from pcsft.units import dimension_check
from writers import utc_now, write_csv, write_json, write_manifest, write_snapshots_parquet


@task(name="integrate_trajectory")
def integrate(cfg: Dict[str, Any]) -> Trajectory:
    with config_errors("Configuration evolve"):
        space = build_space(cfg)
        H = build_hamiltonian(cfg, space)
        psi0 = build_initial(cfg, space)
    steps = max(1, int(round(cfg["t_end"] / cfg["dt"])))
    method = None if cfg["method"] == "auto" else cfg["method"]
    print(f"🔄 {H.kind} sur {space.representation} (n={space.n}), {steps} pas de {cfg['dt']:g}")
    return evolve(H, psi0, cfg["dt"], steps, cfg["sample_stride"], method)


@task(name="dimension_check")
def check_dimensions(cfg: Dict[str, Any]) -> Dict[str, Any]:
    """Contrôle dimensionnel des formes quantique et préquantique (mode physique)."""
    with config_errors("Configuration evolve"):
        space = build_space(cfg)
        dh = build_physical_hamiltonian(cfg, space)
    alpha = dh.units.from_ev(cfg["units"].get("alpha_ev", 1e-15))
    reports = [dimension_check(dh), dimension_check(dh.prequantum(alpha))]
    for report in reports:
        print(f"✅ {report.kind} ({report.form}): " + ", ".join(f"{k}={v}" for k, v in report.terms.items()))
    return {"dimensions": [r.to_dict() for r in reports]}


def linear_coupling(ham: Dict[str, Any]) -> float:
    """Couplage α_c du terme |Ψ|²Ψ (F(q) = c·q pour general-f)."""
    nonlinearity = ham.get("nonlinearity", {})
    if ham["kind"] == "general-f" and nonlinearity.get("kind") == "power" and nonlinearity.get("exponent", 1.0) == 1.0:
        return nonlinearity.get("coeff", 1.0)
    return ham.get("alpha_c", 0.0)


def oracle_checks(cfg: Dict[str, Any], trajectory: Trajectory, report: Dict[str, Any]) -> Dict[str, Any]:
    """Compare la trajectoire à la solution exacte attendue par l'oracle."""
    oracle = cfg["oracle"]
    tolerances = cfg["tolerances"]
    ham, initial = cfg["hamiltonian"], cfg.get("initial", {})
    if oracle == "plane-wave":
        error = plane_wave_phase_error(
            trajectory, trajectory.space, initial.get("amplitude", 1.0), initial.get("mode", 10),
            linear_coupling(ham), ham.get("kinetic", 0.5),
        )
        add_check(report, "phase_error", error, tolerances.get("phase_error", 1e-6))
    elif oracle == "gausson":
        add_check(report, "profile_deviation", profile_deviation(trajectory), tolerances.get("profile_deviation", 1e-3))
    elif oracle == "modes":
        H = build_hamiltonian(cfg, trajectory.space)
        if not isinstance(H, BilinearHamiltonian):
            raise ValueError("L'oracle modal exige un Hamiltonien bilinéaire")
        amplitude, phase = mode_errors(trajectory, np.diag(H.hlin.R), H.alpha_c)
        add_check(report, "amplitude_drift", amplitude, tolerances.get("amplitude_drift", 1e-8))
        add_check(report, "phase_error", phase, tolerances.get("phase_error", 1e-6))
    return report


@flow(name="Evolve Flow", log_prints=True)
def evolve_flow(cfg: Dict[str, Any], out_dir: str, seed: int = PCSFT_DEFAULT_SEED) -> Dict[str, Any]:
    """
    Intègre une trajectoire et vérifie dérives et oracle.

    Processus:
    1. Valide la configuration (défauts fusionnés ensuite)
    2. Intègre (split-step ou point milieu) ou, en mode physique, contrôle les dimensions
    3. Écrit trajectory.csv, snapshots.parquet (option), report.json, manifest.json

    Returns:
        Dict avec statut, code de sortie et fichiers écrits
    """
    started = utc_now()
    validate_config("evolve", cfg)
    full = with_defaults(cfg, EVOLVE_DEFAULTS)
    out = get_output_dir(out_dir)
    files = []

    if full["action"] == "dimension-check":
        try:
            payload = check_dimensions(full)
            status, exit_code = "passed", EXIT_PASSED
        except DimensionError as e:
            print(f"❌ Terme '{e.term}': {e}")
            payload = {"error": str(e), "term": e.term}
            status, exit_code = "failed", EXIT_FAILED
        files.append(write_json({**payload, "status": status}, out, "report.json"))
        files.append(write_manifest(out, "evolve", config_hash(cfg), seed, started))
        return {"status": status, "exit_code": exit_code, "files": files}

    try:
        trajectory = integrate(full)
    except (BlowUpError, ConvergenceError, EvaluationError) as e:
        print(f"❌ Échec numérique: {type(e).__name__}: {e}")
        details = {"error": f"{type(e).__name__}: {e}"}
        if isinstance(e, BlowUpError):
            details.update({"step": e.step, "time": e.time, "norm_ratio": e.norm_ratio})
        files.append(write_json({**details, "status": "numerical-failure"}, out, "report.json"))
        files.append(write_manifest(out, "evolve", config_hash(cfg), seed, started))
        return {"status": "numerical-failure", "exit_code": EXIT_NUMERICAL, "files": files}

    report = check_trajectory(trajectory, full["tolerances"], full["hamiltonian"]["kind"])
    oracle_checks(full, trajectory, report)
    passed = report_passed(report)

    files.append(write_csv(trajectory.to_frame(), out, "trajectory.csv"))
    if full["snapshots"]:
        dims = list(trajectory.space.grid.shape) if trajectory.space.is_grid else [trajectory.space.n]
        files.append(write_snapshots_parquet(trajectory.snapshots_frame(), out, dims, full["sample_stride"]))
    files.append(write_json({**report, "passed": passed}, out, "report.json"))
    files.append(write_manifest(out, "evolve", config_hash(cfg), seed, started))
    generate_check_report([report])

    status = "passed" if passed else "failed"
    print(f"{'✅' if passed else '❌'} Dynamique terminée: {status}")
    return {
        "status": status,
        "exit_code": EXIT_PASSED if passed else EXIT_FAILED,
        "checks": {k: v["value"] for k, v in report["checks"].items()},
        "files": files,
    }


if __name__ == "__main__":
    from experiments import load_config

    config, _ = load_config("cubic-plane-wave")
    print(evolve_flow(config, "./data/runs/cubic-plane-wave"))
