"""Configurations d'expériences : schémas JSON, presets et construction des objets"""

import hashlib
import json
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Tuple

import jsonschema
import numpy as np

from config import PCSFT_PRESETS_DIR
from pcsft.dynamics import (
    BilinearHamiltonian,
    CubicNLS,
    GeneralF,
    Hamiltonian,
    LogNLS,
    QuadraticHamiltonian,
    gaussian_packet,
    gausson,
    load_field,
    plane_wave,
    tabulated_nonlinearity,
)
from pcsft.errors import ConfigError, PCSFTError
from pcsft.phase_space import PhaseSpace, SymplecticOperator, random_symplectic_operator
from pcsft.states import DensityOperator, random_density_operator
from pcsft.units import (
    DimensionedHamiltonian,
    UnitSystem,
    physical_bilinear,
    physical_cubic_nls,
    physical_general_f,
    physical_log_nls,
    physical_quadratic,
)
from pcsft.variables import ClassicalVariable, terms_from_specs


NUMBER = {"type": "number"}
MATRIX = {"type": "array", "items": {"type": "array", "items": NUMBER}}

OPERATOR_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["identity", "diagonal", "random", "matrix"]},
        "scale": NUMBER,
        "values": {"type": "array", "items": NUMBER},
        "seed": {"type": "integer"},
        "R": MATRIX,
        "T": MATRIX,
    },
}

TERM_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["type"],
    "properties": {
        "type": {"enum": ["quadratic", "factored_quartic", "kernel_quartic", "smooth"]},
        "coeff": NUMBER,
        "operator": OPERATOR_SCHEMA,
        "gamma1": OPERATOR_SCHEMA,
        "gamma2": OPERATOR_SCHEMA,
        "weight": NUMBER,
        "name": {"type": "string"},
    },
}

COMMON_PROPERTIES = {
    "command": {"type": "string"},
    "name": {"type": "string"},
    "description": {"type": "string"},
    "seed": {"type": "integer", "minimum": 0},
    "output_dir": {"type": "string"},
    "precision": {"enum": ["f32", "f64"]},
}

DEQUANTIZE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n", "density", "variable", "alphas"],
    "properties": {
        **COMMON_PROPERTIES,
        "n": {"type": "integer", "minimum": 1},
        "density": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "preset": {"enum": ["maximally-mixed", "pure-first", "random"]},
                "seed": {"type": "integer"},
                "rank": {"type": "integer", "minimum": 1},
                "re": MATRIX,
                "im": MATRIX,
            },
        },
        "variable": {
            "type": "object",
            "additionalProperties": False,
            "required": ["terms"],
            "properties": {"name": {"type": "string"}, "terms": {"type": "array", "items": TERM_SCHEMA}},
        },
        "alphas": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 3},
        "count": {"type": "integer", "minimum": 2},
        "path": {"enum": ["auto", "isserlis", "monte-carlo"]},
        "slope_range": {"type": "array", "items": NUMBER, "minItems": 2, "maxItems": 2},
    },
}

POTENTIAL_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {"kind": {"enum": ["none", "constant", "harmonic"]}, "value": NUMBER, "omega": NUMBER},
}

NONLINEARITY_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["power", "saturable", "table"]},
        "coeff": NUMBER,
        "exponent": NUMBER,
        "saturation": NUMBER,
        "q": {"type": "array", "items": NUMBER},
        "values": {"type": "array", "items": NUMBER},
    },
}

EVOLVE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["hamiltonian"],
    "properties": {
        **COMMON_PROPERTIES,
        "action": {"enum": ["integrate", "dimension-check"]},
        "hamiltonian": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["quadratic", "cubic-nls", "log-nls", "general-f", "bilinear"]},
                "n": {"type": "integer", "minimum": 1},
                "alpha_c": NUMBER,
                "b": NUMBER,
                "a": {"type": "number", "exclusiveMinimum": 0},
                "kinetic": NUMBER,
                "potential": POTENTIAL_SCHEMA,
                "nonlinearity": NONLINEARITY_SCHEMA,
                "H": OPERATOR_SCHEMA,
                "hlin": OPERATOR_SCHEMA,
                "gamma1": OPERATOR_SCHEMA,
                "gamma2": OPERATOR_SCHEMA,
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "d": {"type": "integer", "minimum": 1, "maximum": 3},
                "points": {"type": "integer", "minimum": 2},
                "box_length": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["plane-wave", "gaussian", "gausson", "file", "modes"]},
                "amplitude": NUMBER,
                "mode": {"type": "integer"},
                "width": {"type": "number", "exclusiveMinimum": 0},
                "center": NUMBER,
                "k0": NUMBER,
                "norm": {"type": "number", "exclusiveMinimum": 0},
                "path": {"type": "string"},
                "re": {"type": "array", "items": NUMBER},
                "im": {"type": "array", "items": NUMBER},
            },
        },
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "sample_stride": {"type": "integer", "minimum": 1},
        "method": {"enum": ["auto", "splitstep", "midpoint"]},
        "oracle": {"enum": ["none", "plane-wave", "gausson", "modes"]},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "norm_drift": NUMBER,
                "energy_drift": NUMBER,
                "phase_error": NUMBER,
                "profile_deviation": NUMBER,
                "amplitude_drift": NUMBER,
            },
        },
        "snapshots": {"type": "boolean"},
        "units": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["natural", "physical"]},
                "mass": {"type": "number", "exclusiveMinimum": 0},
                "alpha_ev": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}

TRACE_CHECK_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        **COMMON_PROPERTIES,
        "n": {"type": "integer", "minimum": 1},
        "trials": {"type": "integer", "minimum": 1},
        "count": {"type": "integer", "minimum": 2},
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "sigmas": {"type": "number", "exclusiveMinimum": 0},
        "operator": OPERATOR_SCHEMA,
    },
}

SCHEMAS = {"dequantize": DEQUANTIZE_SCHEMA, "evolve": EVOLVE_SCHEMA, "trace-check": TRACE_CHECK_SCHEMA}

EVOLVE_DEFAULTS = {
    "action": "integrate",
    "grid": {"d": 1, "points": 512, "box_length": 2 * np.pi * 10},
    "dt": 1e-3,
    "t_end": 1.0,
    "sample_stride": 100,
    "method": "auto",
    "oracle": "none",
    "tolerances": {"norm_drift": 1e-8, "energy_drift": 1e-6},
    "snapshots": False,
    "units": {"mode": "natural"},
}

TRACE_CHECK_DEFAULTS = {"n": 3, "trials": 20, "count": 100_000, "alpha": 1.0, "sigmas": 4.0}


def load_config(value: str) -> Tuple[Dict[str, Any], Path]:
    """
    Charge une configuration JSON depuis un chemin ou un nom de preset.

    Un nom qui n'est pas un fichier existant est cherché dans PCSFT_PRESETS_DIR.
    """
    path = Path(value)
    if not path.exists():
        path = Path(PCSFT_PRESETS_DIR) / (value if value.endswith(".json") else f"{value}.json")
    if not path.exists():
        raise ConfigError(f"Configuration introuvable: {value}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f), path
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON invalide dans {path}: {e}") from e


def validate_config(command: str, cfg: Dict[str, Any]) -> Dict[str, Any]:
    """Valide contre le schéma de la commande ; clés inconnues rejetées."""
    if command not in SCHEMAS:
        raise ConfigError(f"Commande inconnue: {command}")
    try:
        jsonschema.validate(instance=cfg, schema=SCHEMAS[command])
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<racine>"
        raise ConfigError(f"Configuration {command} invalide ({where}): {e.message}") from e
    if command == "dequantize":
        alphas = cfg["alphas"]
        if any(a <= b for a, b in zip(alphas, alphas[1:])):
            raise ConfigError(f"Configuration dequantize invalide (alphas): suite non strictement décroissante {alphas}")
    return cfg


@contextmanager
def config_errors(what: str) -> Iterator[None]:
    """Les erreurs levées en construisant les objets d'une configuration deviennent des ConfigError."""
    try:
        yield
    except ConfigError:
        raise
    except (PCSFTError, ValueError) as e:
        raise ConfigError(f"{what} invalide: {type(e).__name__}: {e}") from e


def with_defaults(cfg: Dict[str, Any], defaults: Dict[str, Any]) -> Dict[str, Any]:
    """Fusion superficielle (un niveau de dictionnaires imbriqués)."""
    merged = dict(defaults)
    for key, value in cfg.items():
        if isinstance(value, dict) and isinstance(defaults.get(key), dict):
            merged[key] = {**defaults[key], **value}
        else:
            merged[key] = value
    return merged


def config_hash(cfg: Dict[str, Any]) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return "sha256:" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def precision_dtype(cfg: Dict[str, Any]):
    return np.float32 if cfg.get("precision", "f64") == "f32" else np.float64


def build_operator(spec: Dict[str, Any], n: int) -> SymplecticOperator:
    kind = spec["kind"]
    scale = spec.get("scale", 1.0)
    if kind == "identity":
        return SymplecticOperator.identity(n) * scale
    if kind == "diagonal":
        values = spec.get("values")
        if values is None or len(values) != n:
            raise ConfigError(f"Opérateur diagonal: {n} valeurs attendues")
        return SymplecticOperator.diagonal(values) * scale
    if kind == "random":
        return random_symplectic_operator(n, np.random.default_rng(spec.get("seed", 0)), scale)
    R = np.asarray(spec.get("R", np.zeros((n, n))), dtype=float)
    T = np.asarray(spec.get("T", np.zeros((n, n))), dtype=float)
    if R.shape != (n, n) or T.shape != (n, n):
        raise ConfigError(f"Matrices R/T de forme {R.shape}/{T.shape}, attendu ({n}, {n})")
    return SymplecticOperator(R, T) * scale


def build_density(spec: Dict[str, Any], n: int) -> DensityOperator:
    if "re" in spec:
        D = np.asarray(spec["re"], dtype=float) + 1j * np.asarray(spec.get("im", np.zeros((n, n))), dtype=float)
        if D.shape != (n, n):
            raise ConfigError(f"Matrice densité de forme {D.shape}, attendu ({n}, {n})")
        return DensityOperator(D)
    preset = spec.get("preset", "maximally-mixed")
    if preset == "maximally-mixed":
        return DensityOperator.maximally_mixed(n)
    if preset == "pure-first":
        return DensityOperator.pure(np.eye(n)[0])
    return random_density_operator(n, np.random.default_rng(spec.get("seed", 0)), spec.get("rank"))


def build_variable(spec: Dict[str, Any], n: int) -> ClassicalVariable:
    terms = terms_from_specs(n, spec["terms"], lambda op: build_operator(op, n))
    return ClassicalVariable(n, tuple(terms), spec.get("name", "f"))


def build_space(cfg: Dict[str, Any]) -> PhaseSpace:
    ham = cfg["hamiltonian"]
    if ham["kind"] in ("quadratic", "bilinear") or (ham["kind"] == "general-f" and "hlin" in ham):
        if "n" not in ham:
            raise ConfigError(f"Hamiltonien {ham['kind']} : dimension n requise")
        return PhaseSpace.abstract(ham["n"])
    grid = cfg["grid"]
    return PhaseSpace.spatial(grid.get("d", 1), grid.get("points", 512), grid.get("box_length", 2 * np.pi * 10))


def build_potential(space: PhaseSpace, spec: Optional[Dict[str, Any]]) -> Optional[np.ndarray]:
    if spec is None or spec["kind"] == "none":
        return None
    if spec["kind"] == "constant":
        return np.full(space.grid.shape, float(spec.get("value", 0.0)))
    omega = spec.get("omega", 1.0)
    return 0.5 * omega ** 2 * sum(c ** 2 for c in space.grid.coordinates())


def build_nonlinearity(spec: Dict[str, Any]):
    """(F, primitive ou None, nom) ; primitive None ⇒ quadrature de Gauss–Legendre."""
    kind = spec["kind"]
    coeff = spec.get("coeff", 1.0)
    if kind == "power":
        p = spec.get("exponent", 1.0)
        return (lambda q: coeff * np.power(q, p)), None, f"{coeff}*q^{p}"
    if kind == "saturable":
        qs = spec.get("saturation", 1.0)
        return (lambda q: coeff * q / (1.0 + q / qs)), None, f"{coeff}*q/(1+q/{qs})"
    if "q" not in spec or "values" not in spec:
        raise ConfigError("Non-linéarité tabulée : q et values requis")
    F, G = tabulated_nonlinearity(spec["q"], spec["values"])
    return F, G, "table"


def build_hamiltonian(cfg: Dict[str, Any], space: PhaseSpace) -> Hamiltonian:
    """Hamiltonien en unités naturelles."""
    ham = cfg["hamiltonian"]
    kind = ham["kind"]
    n = space.n
    kinetic = ham.get("kinetic", 0.5)
    if kind == "quadratic":
        return QuadraticHamiltonian(space, build_operator(_require(ham, "H"), n))
    if kind == "bilinear":
        return BilinearHamiltonian(
            space,
            build_operator(_require(ham, "hlin"), n),
            ham.get("alpha_c", 0.0),
            build_operator(ham.get("gamma1", {"kind": "identity"}), n),
            build_operator(ham.get("gamma2", {"kind": "identity"}), n),
        )
    if kind == "general-f":
        F, G, name = build_nonlinearity(_require(ham, "nonlinearity"))
        hlin = build_operator(ham["hlin"], n) if "hlin" in ham else None
        potential = None if hlin is not None else build_potential(space, ham.get("potential"))
        return GeneralF(space, F, G, potential, kinetic, hlin, name)
    potential = build_potential(space, ham.get("potential"))
    if kind == "cubic-nls":
        return CubicNLS(space, ham.get("alpha_c", 0.0), potential, kinetic)
    return LogNLS(space, ham.get("b", -0.5), ham.get("a", 1.0), potential, kinetic)


def build_physical_hamiltonian(cfg: Dict[str, Any], space: PhaseSpace) -> DimensionedHamiltonian:
    """Constructeurs en mode physique (SI) ; masse et échelle a explicites."""
    ham = cfg["hamiltonian"]
    units = UnitSystem.si()
    kind = ham["kind"]
    n = space.n
    if kind == "quadratic":
        return physical_quadratic(space, units, build_operator(_require(ham, "H"), n))
    if kind == "bilinear":
        return physical_bilinear(
            space, units,
            build_operator(_require(ham, "hlin"), n),
            ham.get("alpha_c", 0.0),
            build_operator(ham.get("gamma1", {"kind": "identity"}), n),
            build_operator(ham.get("gamma2", {"kind": "identity"}), n),
        )
    mass = _require(cfg["units"], "mass")
    potential = build_potential(space, ham.get("potential"))
    if kind == "cubic-nls":
        return physical_cubic_nls(space, units, mass, ham.get("alpha_c", 0.0), potential)
    if kind == "log-nls":
        return physical_log_nls(space, units, mass, _require(ham, "b"), _require(ham, "a"), potential)
    F, G, name = build_nonlinearity(_require(ham, "nonlinearity"))
    return physical_general_f(space, units, mass, F, G, potential, name)


def build_initial(cfg: Dict[str, Any], space: PhaseSpace) -> np.ndarray:
    spec = cfg.get("initial")
    if spec is None:
        raise ConfigError("Champ initial (initial) requis")
    kind = spec["kind"]
    if kind == "modes":
        re = np.asarray(spec.get("re", []), dtype=float)
        im = np.asarray(spec.get("im", np.zeros_like(re)), dtype=float)
        if re.size != space.n or im.size != space.n:
            raise ConfigError(f"Champ modal de taille {re.size}, attendu {space.n}")
        return re + 1j * im
    if not space.is_grid:
        raise ConfigError(f"Champ initial {kind} réservé aux grilles")
    if kind == "plane-wave":
        return plane_wave(space, spec.get("amplitude", 1.0), spec.get("mode", 10))
    if kind == "gaussian":
        return gaussian_packet(space, spec.get("width", 1.0), spec.get("center", 0.0), spec.get("k0", 0.0), spec.get("norm", 1.0))
    if kind == "gausson":
        ham = cfg["hamiltonian"]
        return gausson(space, ham.get("b", -0.5), spec.get("amplitude", 1.0), ham.get("a", 1.0))
    return load_field(space, _require(spec, "path"))


def _require(spec: Dict[str, Any], key: str):
    if key not in spec:
        raise ConfigError(f"Champ de configuration requis: {key}")
    return spec[key]
