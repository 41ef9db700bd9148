"""Sectioned ``key = value [unit]`` configuration files.

Internally everything is expressed in N, mm, s, K and MPa.  A value may carry
a unit after the number; it is converted to the internal unit of its key.
Keys that are not in :data:`SCHEMA` are rejected.
"""
import configparser
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

log = logging.getLogger(__name__)

# unit -> factor into the internal unit of each dimension
UNITS = {
    "stress": {"MPa": 1.0, "N/mm^2": 1.0, "GPa": 1e3, "kPa": 1e-3, "Pa": 1e-6},
    "length": {"mm": 1.0, "m": 1e3, "cm": 10.0, "um": 1e-3},
    "force": {"N": 1.0, "kN": 1e3},
    "energy_area": {"N/mm": 1.0, "kJ/m^2": 1.0, "J/m^2": 1e-3, "J/mm^2": 1e3},
    "capacity": {"MPa/K": 1.0, "kJ/(m^3*K)": 1e-3, "J/(m^3*K)": 1e-6, "J/(mm^3*K)": 1.0},
    "conductivity": {"N/(s*K)": 1.0, "W/(m*K)": 1.0, "mW/(mm*K)": 1.0},
    "inv_temperature": {"1/K": 1.0},
    "temperature": {"K": 1.0},
    "viscosity": {"MPa*s": 1.0, "Pa*s": 1e-6},
    "velocity": {"mm/s": 1.0, "m/s": 1e3},
    "time": {"s": 1.0, "ms": 1e-3},
    "angle": {"deg": 1.0},
    "curvature": {"1/mm": 1.0, "1/m": 1e-3},
    "number": {"": 1.0, "-": 1.0},
}

SCENARIOS = ("in_plane_bending", "four_point_bending", "tension_uni", "tension_bi", "custom")

# section -> key -> (kind, default); kind is a UNITS dimension or a plain type
SCHEMA = {
    "scenario": {
        "type": ("choice", None),
        "angle": ("angle", 0.0),
        "variant": ("str", "A"),
    },
    "geometry": {
        "length": ("length", None),
        "width": ("length", None),
        "thickness": ("length", None),
        "elements": ("ints3", None),
        "degrees": ("ints3", (2, 2, 2)),
        "grip": ("length", 20.0),
    },
    "loading": {
        "rate": ("velocity", 0.5),
        "u_max": ("length", 60.0),
        "deflection": ("length", 2.0),
        "curvature": ("curvature", 0.1),
    },
    "matrix": {
        "mu": ("stress", 1630.0),
        "alpha": ("number", 2.0),
        "kappa": ("stress", 6250.0),
        "beta": ("number", -2.0),
        "zeta": ("number", 0.53),
    },
    "fiber": {
        "a": ("stress", 79000.0),
        "b": ("stress", 0.0),
        "c_perp": ("force", 16.46),
        "c_par": ("force", 16.46),
    },
    "plastic": {
        "enabled": ("bool", True),
        "y0": ("stress", 22.0),
        "y1": ("stress", 56.8),
        "y2": ("stress", 30.0),
        "om_p1": ("number", 1.0),
        "om_p2": ("number", 115.0),
        "om_t0": ("inv_temperature", 0.4),
        "om_t1": ("inv_temperature", 0.4),
        "om_t2": ("inv_temperature", 0.4),
        "eta_p": ("viscosity", 5000.0),
        "n_p": ("number", 1.0),
        "l_p": ("length", 3.1),
        "f0": ("number", 0.01),
        "q1": ("number", 3.0),
        "q2": ("number", 0.8),
    },
    "fracture": {
        "enabled": ("bool", True),
        "healing": ("bool", False),
        "gce": ("energy_area", 500.0),
        "gcL": ("energy_area", 500.0),
        "gcM": ("energy_area", 500.0),
        "gcp": ("energy_area", 50.0),
        "om_f": ("number", 3.0),
        "eta_f": ("viscosity", 1e-7),
        "eta_fL": ("viscosity", 1e-7),
        "eta_fM": ("viscosity", 1e-7),
        "lf": ("length", 3.1),
        "lfL": ("length", 3.1),
        "lfM": ("length", 3.1),
        "a_g": ("number", 0.001),
        "a_gL": ("number", 0.001),
        "a_gM": ("number", 0.001),
    },
    "thermal": {
        "mode": ("str", "isothermal"),
        "theta": ("temperature", 293.0),
        "theta_ref": ("temperature", 293.0),
        "c_mat": ("capacity", 1.86),
        "c_fib": ("capacity", 2.08),
        "eps": ("inv_temperature", 106e-6),
        "upsilon": ("inv_temperature", 5e-6),
        "gamma": ("number", 1.0),
        "K": ("conductivity", 0.25),
        "K_conv": ("conductivity", 0.0),
        "nu_pmat": ("number", 0.9),
        "nu_fmat": ("number", 0.9),
        "nu_ffib": ("number", 0.9),
    },
    "solver": {
        "dt": ("time", 0.2),
        "steps": ("int", 0),
        "rtol": ("number", 1e-8),
        "atol": ("force", 1e-9),
        "max_newton": ("int", 30),
        "max_cuts": ("int", 8),
        "passes": ("int", 1),
        "beta_pen": ("number", 1e6),
        "threads": ("int", 0),
    },
    "output": {
        "dir": ("str", "output"),
        "every": ("int", 1),
        "vtk": ("bool", True),
    },
}

REQUIRED = [("scenario", "type")]
_GEOMETRY_REQUIRED = ["length", "width", "thickness", "elements"]
_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


def _parse_value(section, key, raw):
    kind, _ = SCHEMA[section][key]
    where = f"{section}.{key}"
    raw = raw.strip()
    if kind == "choice":
        if raw not in SCENARIOS:
            raise ConfigError(f"{where}: unknown scenario '{raw}' (choose from {', '.join(SCENARIOS)})")
        return raw
    if kind == "str":
        return raw
    if kind == "bool":
        low = raw.lower()
        if low in ("1", "yes", "true", "on"):
            return True
        if low in ("0", "no", "false", "off"):
            return False
        raise ConfigError(f"{where}: expected a boolean, got '{raw}'")
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{where}: expected an integer, got '{raw}'") from None
    if kind == "ints3":
        parts = [p for p in re.split(r"[,\sx]+", raw) if p]
        try:
            vals = tuple(int(p) for p in parts)
        except ValueError:
            raise ConfigError(f"{where}: expected three integers, got '{raw}'") from None
        if len(vals) != 3 or min(vals) < 1:
            raise ConfigError(f"{where}: expected three positive integers, got '{raw}'")
        return vals
    m = _NUM.match(raw)
    if not m:
        raise ConfigError(f"{where}: cannot parse number from '{raw}'")
    value, unit = float(m.group(1)), m.group(2).replace(" ", "")
    table = UNITS[kind]
    if unit == "":
        return value
    if unit not in table:
        raise ConfigError(f"{where}: bad unit '{unit}' (allowed: {', '.join(u for u in table if u)})")
    return value * table[unit]


def _format_value(section, key, value):
    kind, _ = SCHEMA[section][key]
    if kind == "bool":
        return "yes" if value else "no"
    if kind == "ints3":
        return ", ".join(str(v) for v in value)
    if kind in ("int", "str", "choice"):
        return str(value)
    unit = next(iter(UNITS[kind]))
    return f"{value!r} {unit}".rstrip()


@dataclass
class SimulationConfig:
    """Validated configuration; ``values[section][key]`` in internal units."""

    values: dict = field(default_factory=dict)
    source: str = ""

    def __getitem__(self, section):
        return self.values[section]

    @property
    def scenario(self):
        return self.values["scenario"]["type"]

    def get(self, section, key):
        return self.values[section][key]

    def dumps(self):
        """Serialize with every key in its internal unit."""
        lines = []
        for section, keys in SCHEMA.items():
            lines.append(f"[{section}]")
            for key in keys:
                value = self.values[section].get(key)
                if value is None:
                    continue
                lines.append(f"{key} = {_format_value(section, key, value)}")
            lines.append("")
        return "\n".join(lines)

    def material(self):
        """Build the :class:`~gradfiber.material.Material` described by the file."""
        from .fiber import FiberParams
        from .gtn import PlasticParams
        from .material import Material
        from .matrix import MatrixParams
        from .phasefield import FractureParams
        from .thermal import ThermalParams

        v = self.values
        th = v["thermal"]
        m = v["matrix"]
        mat = MatrixParams(mu=(m["mu"],), alpha=(m["alpha"],), kappa=m["kappa"], beta=m["beta"],
                           eps=th["eps"], gamma=th["gamma"], theta0=th["theta_ref"],
                           c_mat=th["c_mat"], zeta=m["zeta"])
        fb = v["fiber"]
        fib = FiberParams(a=fb["a"], b=fb["b"], c_par=fb["c_par"], c_perp=fb["c_perp"],
                          upsilon=th["upsilon"], c_fib=th["c_fib"], theta0=th["theta_ref"],
                          zeta=m["zeta"])
        pl = dict(v["plastic"])
        plastic = PlasticParams(theta_ref=th["theta_ref"], **pl)
        fracture = FractureParams(nu_pmat=th["nu_pmat"], nu_fmat=th["nu_fmat"],
                                  nu_ffib=th["nu_ffib"], **v["fracture"])
        thermal = ThermalParams(K_mat=th["K"], K_fib=th["K"], K_conv=th["K_conv"],
                                theta_ref=th["theta_ref"], isothermal=th["mode"] == "isothermal",
                                theta_init=th["theta"])
        return Material(mat, fib, plastic, fracture, thermal)


def parse_config(text, source="<string>"):
    """Parse configuration text into a validated :class:`SimulationConfig`."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    missing = [f"{s}.{k}" for s, k in REQUIRED if not cp.has_option(s, k)]
    if missing:
        raise ConfigError(f"{source}: missing required keys: {', '.join(missing)}")
    values = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key in cp[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {section}.{key}")
    for section, keys in SCHEMA.items():
        values[section] = {}
        for key, (_, default) in keys.items():
            if cp.has_option(section, key):
                values[section][key] = _parse_value(section, key, cp[section][key])
            else:
                values[section][key] = default
                if default is not None:
                    log.debug("default %s.%s = %r", section, key, default)
    cfg = SimulationConfig(values, source)
    _validate(cfg)
    return cfg


def _validate(cfg):
    v = cfg.values
    if cfg.scenario == "custom":
        missing = [f"geometry.{k}" for k in _GEOMETRY_REQUIRED if v["geometry"][k] is None]
        if missing:
            raise ConfigError(f"{cfg.source}: custom scenario needs {', '.join(missing)}")
    pl, fr = v["plastic"], v["fracture"]
    if pl["enabled"] and pl["l_p"] < fr["lf"]:
        raise ConfigError(f"{cfg.source}: plastic.l_p = {pl['l_p']} must not be below fracture.lf = {fr['lf']} "
                          "(the plastic length scale must be at least the fracture length scale)")
    if v["thermal"]["mode"] not in ("isothermal", "coupled"):
        raise ConfigError(f"{cfg.source}: thermal.mode must be 'isothermal' or 'coupled'")
    if v["scenario"]["variant"] not in ("A", "B"):
        raise ConfigError(f"{cfg.source}: scenario.variant must be 'A' or 'B'")
    for key in ("dt",):
        if v["solver"][key] <= 0.0:
            raise ConfigError(f"{cfg.source}: solver.{key} must be positive")
    for key in ("mu", "kappa"):
        if v["matrix"][key] <= 0.0:
            raise ConfigError(f"{cfg.source}: matrix.{key} must be positive")
    if not 0.0 <= v["matrix"]["zeta"] <= 1.0:
        raise ConfigError(f"{cfg.source}: matrix.zeta must lie in [0, 1]")
    try:
        cfg.material()
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{cfg.source}: {exc}") from None


def load_config(path):
    """Read and validate a configuration file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cfg = parse_config(path.read_text(), str(path))
    for section, keys in cfg.values.items():
        for key, value in keys.items():
            log.info("config %s.%s = %r", section, key, value)
    return cfg
