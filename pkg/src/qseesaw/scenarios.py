"""Scenario definitions: flat key=value config files with bracketed section
headers, validated against a fixed key set, plus the built-in figure
scenarios shipped as package data.

Model names and what they run:

* ``seesaw``            closed-system oscillator pair (Schrodinger)
* ``twosite-quantum``   two-site lattice + cavity; ``method`` picks the
                        Lindblad master equation (default) or an MCWF ensemble
* ``twosite-meanfield`` factorized atom/c-number field equations
* ``fullspace-mcwf``    plane-wave atom + cavity, MCWF ensemble

Site convention (matching the tight-binding gauge): the "left" well sits at
kx = +pi/2 (positive cavity-coupling element) and the "right" well at
kx = -pi/2, so a right-localized atom has mean position -pi/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .dynamics import IntegratorConfig, MeanFieldState
from .hilbert import (
    HilbertSpace,
    StateVector,
    annihilation_matrix,
    coherent_state,
    number_matrix,
    tensor_product_op,
)
from .models import (
    FullSpaceParams,
    SeesawParams,
    TwoSiteParams,
    compute_wannier_couplings,
    twosite_atomic_ops,
)
from .observables import Observable, ObservableSet, negativity, spatial_statistics

__all__ = [
    "Scenario",
    "ScenarioError",
    "load_scenario",
    "loads_scenario",
    "resolve_scenario_source",
    "builtin_scenario_names",
    "list_builtin_scenarios",
]

MODELS = ("seesaw", "twosite-quantum", "twosite-meanfield", "fullspace-mcwf")


class ScenarioError(ValueError):
    """Malformed or invalid scenario configuration."""


# ---------------------------------------------------------------------------
# picklable state functionals (nonlinear observables)


@dataclass(frozen=True)
class NegativityOf:
    label: str

    def __call__(self, state):
        return negativity(state, self.label)


@dataclass(frozen=True)
class SpatialMomentOf:
    """index 0 -> mean_x, 1 -> var_x, 2 -> mean_sin_kx."""

    label: str
    kind: str
    index: int

    def __call__(self, state):
        return spatial_statistics(state, self.label, self.kind)[self.index]


@dataclass(frozen=True)
class FieldIntensityOf:
    """|<a>|^2, the coherent part of the field intensity."""

    label: str
    op_matrix_dim: int

    def __call__(self, state):
        from .hilbert import expectation_value

        a_full = tensor_product_op(state.space, {self.label: annihilation_matrix(self.op_matrix_dim)})
        return abs(expectation_value(a_full, state)) ** 2


# ---------------------------------------------------------------------------
# config text parsing


def _parse_config_text(text: str, source: str) -> dict[str, dict[str, tuple[str, int]]]:
    """Flat INI-like parser; returns {section: {key: (raw_value, line_no)}}."""
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current: str | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if not current:
                raise ScenarioError(f"{source}:{line_no}: empty section header")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ScenarioError(f"{source}:{line_no}: expected 'key = value', got {line!r}")
        if current is None:
            raise ScenarioError(f"{source}:{line_no}: key outside any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ScenarioError(f"{source}:{line_no}: empty key")
        if key in sections[current]:
            raise ScenarioError(f"{source}:{line_no}: duplicate key {key!r}")
        sections[current][key] = (value, line_no)
    if not sections:
        raise ScenarioError(f"{source}:1: empty scenario file")
    return sections


def _convert(raw: str, typ, source: str, key: str, line_no: int):
    try:
        if typ is float:
            return float(raw)
        if typ is int:
            v = float(raw)
            if v != int(v):
                raise ValueError("not an integer")
            return int(v)
        if typ is str:
            return raw
        if typ is complex:
            return complex(raw.replace(" ", ""))
    except ValueError as exc:
        raise ScenarioError(
            f"{source}:{line_no}: key {key!r}: cannot parse {raw!r} as {typ.__name__} ({exc})")
    raise AssertionError(typ)


# key schemas: {section: {key: (type, default-or-REQUIRED)}}
_REQUIRED = object()

_SCENARIO_KEYS = {
    "name": (str, _REQUIRED),
    "model": (str, _REQUIRED),
    "method": (str, ""),
    "initial_state": (str, _REQUIRED),
    "outputs": (str, _REQUIRED),
    "asymmetry": (float, 0.0),
    "description": (str, ""),
}
_INTEGRATOR_KEYS = {
    "dt": (float, _REQUIRED),
    "t_final": (float, _REQUIRED),
    "record_stride": (int, 1),
    "method": (str, "rk4"),
}
_ENSEMBLE_KEYS = {
    "n_traj": (int, 1),
    "master_seed": (int, 0),
    "n_workers": (int, 1),
    "density_stride": (int, 1),
}
_PARAM_KEYS = {
    "seesaw": {
        "omega_x": (float, _REQUIRED),
        "omega_phi": (float, _REQUIRED),
        "J": (float, _REQUIRED),
        "cutoff_x": (int, 56),
        "cutoff_phi": (int, 48),
    },
    "twosite": {
        "J": (float, None),
        "Jtilde": (float, None),
        "U0": (float, _REQUIRED),
        "Delta_c": (float, _REQUIRED),
        "kappa": (float, 1.0),
        "N_atoms": (int, _REQUIRED),
        "photon_cutoff": (int, 12),
        "V0": (float, None),
        "recoil_ratio": (float, None),
    },
    "fullspace": {
        "V0": (float, _REQUIRED),
        "U0": (float, _REQUIRED),
        "Delta_c": (float, _REQUIRED),
        "kappa": (float, 1.0),
        "recoil_ratio": (float, _REQUIRED),
        "n_momentum": (int, 43),
        "photon_cutoff": (int, 6),
    },
}

_MODEL_OUTPUTS = {
    "seesaw": ("negativity", "var_x", "mean_x", "var_phi", "mean_phi"),
    "twosite-quantum": ("photon_number", "mean_a", "mean_field_intensity", "negativity",
                        "imbalance", "imbalance_sq", "pair_correlation"),
    "twosite-meanfield": ("intensity", "re_alpha", "im_alpha", "imbalance"),
    "fullspace-mcwf": ("photon_number", "mean_a", "mean_field_intensity", "negativity",
                       "mean_x", "var_x", "mean_sin_kx"),
}


def _apply_schema(section: str, schema: dict, entries: dict, source: str) -> dict:
    out = {}
    for key, (raw, line_no) in entries.items():
        if key not in schema:
            raise ScenarioError(
                f"{source}:{line_no}: unknown key {key!r} in [{section}] "
                f"(known: {', '.join(sorted(schema))})")
        out[key] = _convert(raw, schema[key][0], source, key, line_no)
    for key, (_, default) in schema.items():
        if key in out:
            continue
        if default is _REQUIRED:
            raise ScenarioError(f"{source}: missing required key {key!r} in [{section}]")
        if default is not None:
            out[key] = default
    return out


@dataclass
class Scenario:
    """A fully validated run description."""

    name: str
    model: str
    method: str
    initial_state: str
    outputs: tuple[str, ...]
    params: object
    integrator: IntegratorConfig
    n_traj: int = 1
    master_seed: int = 0
    n_workers: int = 1
    density_stride: int = 1
    asymmetry: float = 0.0
    description: str = ""
    resolved: dict = field(default_factory=dict)


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    """Parse and validate a scenario from config text."""
    sections = _parse_config_text(text, source)
    known_sections = {"scenario", "params", "integrator", "ensemble"}
    for sec, entries in sections.items():
        if sec not in known_sections:
            line_no = min(ln for _, ln in entries.values()) if entries else 1
            raise ScenarioError(f"{source}:{line_no}: unknown section [{sec}]")
    if "scenario" not in sections:
        raise ScenarioError(f"{source}: missing [scenario] section")
    sc = _apply_schema("scenario", _SCENARIO_KEYS, sections["scenario"], source)
    model = sc["model"]
    if model not in MODELS:
        raise ScenarioError(f"{source}: model must be one of {MODELS}, got {model!r}")
    method = sc["method"] or ("lindblad" if model == "twosite-quantum" else
                              "mcwf" if model == "fullspace-mcwf" else "")
    if model == "twosite-quantum" and method not in ("lindblad", "mcwf"):
        raise ScenarioError(f"{source}: method must be lindblad or mcwf, got {method!r}")

    if "integrator" not in sections:
        raise ScenarioError(f"{source}: missing [integrator] section")
    integ = _apply_schema("integrator", _INTEGRATOR_KEYS, sections["integrator"], source)
    ens = _apply_schema("ensemble", _ENSEMBLE_KEYS, sections.get("ensemble", {}), source)

    if "params" not in sections:
        raise ScenarioError(f"{source}: missing [params] section")
    schema_name = {"seesaw": "seesaw", "twosite-quantum": "twosite",
                   "twosite-meanfield": "twosite", "fullspace-mcwf": "fullspace"}[model]
    pvals = _apply_schema("params", _PARAM_KEYS[schema_name], sections["params"], source)

    outputs = tuple(s.strip() for s in sc["outputs"].split(",") if s.strip())
    if not outputs:
        raise ScenarioError(f"{source}: outputs list is empty")
    allowed = _MODEL_OUTPUTS[model]
    for name in outputs:
        if name not in allowed:
            raise ScenarioError(
                f"{source}: output {name!r} not defined for model {model} "
                f"(available: {', '.join(allowed)})")

    try:
        params = _build_params(model, pvals, source)
        cfg = IntegratorConfig(dt=integ["dt"], t_final=integ["t_final"],
                               method=integ["method"], record_stride=integ["record_stride"])
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{source}: {exc}") from exc

    scenario = Scenario(
        name=sc["name"], model=model, method=method,
        initial_state=sc["initial_state"], outputs=outputs, params=params,
        integrator=cfg, n_traj=ens["n_traj"], master_seed=ens["master_seed"],
        n_workers=ens["n_workers"], density_stride=ens["density_stride"],
        asymmetry=sc["asymmetry"], description=sc["description"],
        resolved={"scenario": {**sc, "method": method},
                  "params": _params_echo(params),
                  "integrator": integ, "ensemble": ens},
    )
    # recipe validation happens here so config errors surface at load time
    build_initial_state(scenario)
    return scenario


def _build_params(model: str, p: dict, source: str):
    if model == "seesaw":
        return SeesawParams(omega_x=p["omega_x"], omega_phi=p["omega_phi"], J=p["J"],
                            cutoff_x=p["cutoff_x"], cutoff_phi=p["cutoff_phi"])
    if model in ("twosite-quantum", "twosite-meanfield"):
        J, Jt = p.get("J"), p.get("Jtilde")
        if (J is None or Jt is None):
            if p.get("V0") is None or p.get("recoil_ratio") is None:
                raise ScenarioError(
                    f"{source}: twosite params need either (J, Jtilde) or "
                    "(V0, recoil_ratio) for the tight-binding reduction")
            wan = compute_wannier_couplings(p["V0"], p["U0"], p["recoil_ratio"])
            J = wan.J if J is None else J
            Jt = wan.Jtilde if Jt is None else Jt
        return TwoSiteParams(J=J, Jtilde=Jt, U0=p["U0"], Delta_c=p["Delta_c"],
                             kappa=p["kappa"], N_atoms=p["N_atoms"],
                             photon_cutoff=p["photon_cutoff"])
    if model == "fullspace-mcwf":
        return FullSpaceParams(V0=p["V0"], U0=p["U0"], Delta_c=p["Delta_c"],
                               kappa=p["kappa"], recoil_ratio=p["recoil_ratio"],
                               n_momentum=p["n_momentum"], photon_cutoff=p["photon_cutoff"])
    raise AssertionError(model)


def _params_echo(params) -> dict:
    return {k: v for k, v in vars(params).items()}


# ---------------------------------------------------------------------------
# initial-state recipes


def superfluid_amplitudes(N: int, asymmetry: float = 0.0) -> np.ndarray:
    """Every atom in (c_l|l> + c_r|r>) with |c_l|^2 - |c_r|^2 = asymmetry,
    expanded over the fixed-N basis (n_l descending).  At asymmetry 0 the
    amplitudes are bitwise symmetric, preserving the mean-field fixed point."""
    if not -1.0 <= asymmetry <= 1.0:
        raise ValueError("asymmetry must lie in [-1, 1]")
    cl = math.sqrt((1.0 + asymmetry) / 2.0)
    cr = math.sqrt((1.0 - asymmetry) / 2.0)
    amp = np.array([math.sqrt(math.comb(N, N - i)) * cl ** (N - i) * cr ** i
                    for i in range(N + 1)])
    return amp / np.linalg.norm(amp)


def _atomic_recipe(name: str, N: int, asymmetry: float) -> np.ndarray:
    if name == "superfluid":
        return superfluid_amplitudes(N, asymmetry)
    if name == "mott":
        if N % 2:
            raise ScenarioError(f"mott initial state needs an even atom number, got N={N}")
        amp = np.zeros(N + 1)
        amp[N // 2] = 1.0
        return amp
    if name == "all-left":
        amp = np.zeros(N + 1)
        amp[0] = 1.0
        return amp
    if name == "all-right":
        amp = np.zeros(N + 1)
        amp[N] = 1.0
        return amp
    raise ScenarioError(
        f"unknown atomic recipe {name!r} (superfluid, mott, all-left, all-right)")


def _split_recipe(recipe: str) -> tuple[str, str]:
    """'atomic+field' -> (atomic, field); field defaults to 'vacuum'."""
    if "+" in recipe:
        atomic, fieldpart = recipe.split("+", 1)
        return atomic.strip(), fieldpart.strip()
    return recipe.strip(), "vacuum"


def _field_amplitude_auto(s: Scenario) -> complex:
    """Self-consistent coherent amplitude for the localized start:
    alpha = -i g <sin(kx)> / (kappa - i(Delta_c - U0))."""
    p = s.params
    if isinstance(p, TwoSiteParams):
        at, _ = _split_recipe(s.initial_state)
        amp = _atomic_recipe(at, p.N_atoms, s.asymmetry)
        dz = np.real(np.diag(twosite_atomic_ops(p.N_atoms)["dz"]))
        mean_d = float(np.sum(np.abs(amp) ** 2 * dz))
        return -1j * p.Jtilde * mean_d / (p.kappa - 1j * p.detuning_eff)
    assert isinstance(p, FullSpaceParams)
    at, _ = _split_recipe(s.initial_state)
    xi0 = _packet_center(at)
    sigma2 = _packet_width_sq(p)
    g = math.sqrt(p.V0 * p.U0)
    mean_sin = math.sin(xi0) * math.exp(-sigma2 / 2.0)
    return -1j * g * mean_sin / (p.kappa - 1j * (p.Delta_c - p.U0))


def _field_recipe(fieldpart: str, s: Scenario, cutoff: int) -> np.ndarray:
    if fieldpart == "vacuum":
        amp = np.zeros(cutoff, dtype=np.complex128)
        amp[0] = 1.0
        return amp
    if fieldpart.startswith("coherent(") and fieldpart.endswith(")"):
        arg = fieldpart[len("coherent("):-1].strip()
        alpha = _field_amplitude_auto(s) if arg == "auto" else complex(arg.replace(" ", ""))
        return coherent_state(alpha, cutoff).amplitudes
    raise ScenarioError(f"unknown field recipe {fieldpart!r} (vacuum, coherent(z), coherent(auto))")


def _packet_center(atomic: str) -> float:
    # left well at +pi/2 (positive coupling site), right well at -pi/2
    if atomic == "right-localized":
        return -math.pi / 2.0
    if atomic == "left-localized":
        return math.pi / 2.0
    raise ScenarioError(f"unknown motional recipe {atomic!r}")


def _packet_width_sq(p: FullSpaceParams) -> float:
    v = -p.V0
    if v <= 0:
        raise ScenarioError("localized packet needs V0 < 0")
    omega = math.sqrt(2.0 * v * p.recoil_ratio)
    return p.recoil_ratio / (2.0 * omega)


def build_initial_state(s: Scenario):
    """Construct the initial state object for a scenario."""
    p = s.params
    if s.model == "seesaw":
        assert isinstance(p, SeesawParams)
        space = p.space
        amp = np.zeros(space.dim, dtype=np.complex128)
        if s.initial_state == "product-ground":
            amp[0] = 1.0
        elif s.initial_state == "bell":
            if p.cutoff_x < 2 or p.cutoff_phi < 2:
                raise ScenarioError("bell recipe needs cutoffs >= 2")
            amp[0] = 1.0 / math.sqrt(2.0)
            amp[1 * p.cutoff_phi + 1] = 1.0 / math.sqrt(2.0)
        else:
            raise ScenarioError(
                f"unknown seesaw recipe {s.initial_state!r} (product-ground, bell)")
        return StateVector(space, amp)
    if s.model == "twosite-meanfield":
        assert isinstance(p, TwoSiteParams)
        at, fieldpart = _split_recipe(s.initial_state)
        amp = _atomic_recipe(at, p.N_atoms, s.asymmetry)
        alpha = 0.0
        if fieldpart != "vacuum":
            if fieldpart.startswith("coherent(") and fieldpart.endswith(")"):
                arg = fieldpart[len("coherent("):-1].strip()
                alpha = _field_amplitude_auto(s) if arg == "auto" else complex(arg)
            else:
                raise ScenarioError(f"unknown field recipe {fieldpart!r}")
        return MeanFieldState(amp.astype(np.complex128), alpha)
    if s.model == "twosite-quantum":
        assert isinstance(p, TwoSiteParams)
        at, fieldpart = _split_recipe(s.initial_state)
        atomic = _atomic_recipe(at, p.N_atoms, s.asymmetry).astype(np.complex128)
        fld = _field_recipe(fieldpart, s, p.photon_cutoff)
        return StateVector(p.space, np.kron(atomic, fld))
    if s.model == "fullspace-mcwf":
        assert isinstance(p, FullSpaceParams)
        at, fieldpart = _split_recipe(s.initial_state)
        n_max = p.n_max
        if at == "flat":
            mot = np.zeros(p.n_momentum, dtype=np.complex128)
            mot[n_max] = 1.0
        else:
            xi0 = _packet_center(at)
            sigma2 = _packet_width_sq(p)
            nidx = np.arange(-n_max, n_max + 1)
            mot = np.exp(-sigma2 * nidx ** 2) * np.exp(-1j * nidx * xi0)
            mot /= np.linalg.norm(mot)
        fld = _field_recipe(fieldpart, s, p.photon_cutoff)
        return StateVector(p.space, np.kron(mot, fld))
    raise AssertionError(s.model)


# ---------------------------------------------------------------------------
# observables per model


def build_observables(s: Scenario) -> ObservableSet:
    """ObservableSet for the scenario's requested outputs, in declaration order.

    The mean-field integrator records its quantities natively, so meanfield
    scenarios get an empty set here.
    """
    if s.model == "twosite-meanfield":
        return ObservableSet(())
    p = s.params
    entries = []
    for name in s.outputs:
        entries.append(_make_observable(name, s.model, p))
    return ObservableSet(tuple(entries))


def _make_observable(name: str, model: str, p) -> Observable:
    if model == "seesaw":
        mapping = {
            "negativity": Observable(name, "func", func=NegativityOf("x")),
            "mean_x": Observable(name, "func", func=SpatialMomentOf("x", "oscillator", 0)),
            "var_x": Observable(name, "func", func=SpatialMomentOf("x", "oscillator", 1)),
            "mean_phi": Observable(name, "func", func=SpatialMomentOf("phi", "oscillator", 0)),
            "var_phi": Observable(name, "func", func=SpatialMomentOf("phi", "oscillator", 1)),
        }
        return mapping[name]
    space = p.space
    cutoff = p.photon_cutoff
    if name == "photon_number":
        return Observable(name, "op",
                          op=tensor_product_op(space, {"field": number_matrix(cutoff)}))
    if name == "mean_a":
        return Observable(name, "op",
                          op=tensor_product_op(space, {"field": annihilation_matrix(cutoff)}),
                          complex_valued=True)
    if name == "mean_field_intensity":
        return Observable(name, "func", func=FieldIntensityOf("field", cutoff))
    if name == "negativity":
        label = "atoms" if model == "twosite-quantum" else "motion"
        return Observable(name, "func", func=NegativityOf(label))
    if model == "twosite-quantum":
        ops = twosite_atomic_ops(p.N_atoms)
        if name == "imbalance":
            return Observable(name, "op", op=tensor_product_op(space, {"atoms": ops["dz"]}))
        if name == "imbalance_sq":
            return Observable(name, "op",
                              op=tensor_product_op(space, {"atoms": ops["dz"] @ ops["dz"]}))
        if name == "pair_correlation":
            return Observable(name, "op", op=tensor_product_op(space, {"atoms": ops["nlnr"]}))
    if model == "fullspace-mcwf":
        if name == "mean_x":
            return Observable(name, "func", func=SpatialMomentOf("motion", "planewave", 0))
        if name == "var_x":
            return Observable(name, "func", func=SpatialMomentOf("motion", "planewave", 1))
        if name == "mean_sin_kx":
            return Observable(name, "func", func=SpatialMomentOf("motion", "planewave", 2))
    raise AssertionError((name, model))


def truncation_monitor_for(s: Scenario) -> dict[str, str]:
    if s.model == "seesaw":
        if s.initial_state == "bell":
            return {}  # two-level factors, not truncated oscillators
        return {"x": "top", "phi": "top"}
    if s.model == "twosite-quantum":
        return {"field": "top"}
    if s.model == "fullspace-mcwf":
        return {"field": "top", "motion": "edges"}
    return {}


# ---------------------------------------------------------------------------
# built-in scenarios (package data)


def builtin_scenario_names() -> list[str]:
    files = resources.files("qseesaw").joinpath("scenarios")
    return sorted(path.name[:-4] for path in files.iterdir() if path.name.endswith(".cfg"))


def resolve_scenario_source(name_or_path: str) -> tuple[str, str]:
    """Return (text, source_label), resolving builtin names before paths."""
    if name_or_path in builtin_scenario_names():
        ref = resources.files("qseesaw").joinpath("scenarios", name_or_path + ".cfg")
        return ref.read_text(), f"builtin:{name_or_path}"
    import os

    if os.path.exists(name_or_path):
        with open(name_or_path) as fh:
            return fh.read(), name_or_path
    raise ScenarioError(
        f"{name_or_path!r} is neither a builtin scenario ({', '.join(builtin_scenario_names())}) "
        "nor an existing file")


def load_scenario(name_or_path: str) -> Scenario:
    text, source = resolve_scenario_source(name_or_path)
    return loads_scenario(text, source)


def list_builtin_scenarios() -> list[tuple[str, str]]:
    out = []
    for name in builtin_scenario_names():
        sc = load_scenario(name)
        out.append((name, sc.description or sc.name))
    return out
