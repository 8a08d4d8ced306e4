"""Flow de déquantification : balayage en α du reste asymptotique"""

from pathlib import Path
from typing import Any, Dict

from prefect import flow, task

from config import PCSFT_DEFAULT_COUNT, PCSFT_DEFAULT_SEED, PCSFT_THREADS, get_output_dir
from experiments import build_density, build_variable, config_errors, config_hash, precision_dtype, validate_config
from pcsft.checks import check_asymptotics, generate_check_report, report_passed
from pcsft.dequantization import AsymptoticsReport, verify_asymptotics
from pcsft.errors import EvaluationError, NoiseDominatedError, NonSmoothError
from writers import utc_now, write_csv, write_json, write_manifest


EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_NOISE = 3
EXIT_NUMERICAL = 4


@task(name="verify_asymptotics")
def run_asymptotics(cfg: Dict[str, Any], seed: int) -> AsymptoticsReport:
    """Construit D et f puis vérifie l'ordre α² du reste."""
    n = cfg["n"]
    with config_errors("Configuration dequantize"):
        D = build_density(cfg["density"], n)
        f = build_variable(cfg["variable"], n)
    print(f"🔄 Variable {f.name} ({len(f.terms)} termes), n={n}, chemin {cfg.get('path', 'auto')}")
    return verify_asymptotics(
        f,
        D,
        cfg["alphas"],
        count=cfg.get("count", PCSFT_DEFAULT_COUNT),
        seed=seed,
        path=cfg.get("path", "auto"),
        workers=PCSFT_THREADS,
        dtype=precision_dtype(cfg),
    )


@flow(name="Dequantize Flow", log_prints=True)
def dequantize_flow(cfg: Dict[str, Any], out_dir: str, seed: int = PCSFT_DEFAULT_SEED) -> Dict[str, Any]:
    """
    Vérifie ⟨f⟩_ρ = (α/2)⟨T(f)⟩_T(ρ) + O(α²) sur une grille de α.

    Processus:
    1. Valide la configuration
    2. Calcule classique, terme quantique et reste pour chaque α
    3. Ajuste la pente log-log du reste
    4. Écrit asymptotics.csv, report.json et manifest.json

    Returns:
        Dict avec statut, code de sortie et fichiers écrits
    """
    started = utc_now()
    validate_config("dequantize", cfg)
    out = get_output_dir(out_dir)
    slope_range = tuple(cfg.get("slope_range", (1.8, 2.2)))
    print(f"🔄 Démarrage déquantification ({len(cfg['alphas'])} valeurs de α, graine {seed})...")

    result: Dict[str, Any] = {"files": []}
    try:
        report = run_asymptotics(cfg, seed)
        status = report.status
    except NoiseDominatedError as e:
        print(f"⚠️ {e}")
        report, status = e.report, "noise-dominated"
    except (EvaluationError, NonSmoothError) as e:
        print(f"❌ Échec numérique: {type(e).__name__}: {e}")
        result.update({"status": "numerical-failure", "exit_code": EXIT_NUMERICAL, "error": f"{type(e).__name__}: {e}"})
        result["files"].append(write_manifest(out, "dequantize", config_hash(cfg), seed, started))
        return result

    checks = check_asymptotics(report, slope_range)
    passed = status != "noise-dominated" and report_passed(checks)
    payload = report.to_dict()
    payload.update({"slope_range": list(slope_range), "passed": passed})

    result["files"].append(write_csv(report.to_frame(), out, "asymptotics.csv"))
    result["files"].append(write_json(payload, out, "report.json"))
    result["files"].append(write_manifest(out, "dequantize", config_hash(cfg), seed, started))
    generate_check_report([checks])

    if status == "noise-dominated":
        exit_code = EXIT_NOISE
    else:
        exit_code = EXIT_PASSED if passed else EXIT_FAILED
    result.update({"status": status, "passed": passed, "slope": report.fitted_slope, "exit_code": exit_code})
    print(f"{'✅' if exit_code == EXIT_PASSED else '❌'} Déquantification terminée: {status}, pente {report.fitted_slope}")
    return result


if __name__ == "__main__":
    from experiments import load_config

    config, _ = load_config("quartic-demo")
    print(dequantize_flow(config, str(Path("./data/runs/quartic-demo"))))
