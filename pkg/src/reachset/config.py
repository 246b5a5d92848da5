"""Experiment configuration and its JSON/TOML loader."""

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from reachset.errors import ConfigError
from reachset.models import BimodalParams, CaseIParams
from reachset.polyopt import SearchSettings

logger = logging.getLogger(__name__)

CASES = ("fan", "bimodal", "file")
METHODS = ("optimal", "heuristic", "bbox")
ENCLOSE_MODES = ("level-set", "samples")
DEFAULT_NS = {"fan": 70, "bimodal": 60, "file": 70}

# CLI and math-notation spellings accepted in config files
ALIASES = {
    "N_ds": "n_ds",
    "n-ds": "n_ds",
    "N": "grid",
    "n": "n_sides",
    "n-sides": "n_sides",
    "ns": "n_s",
    "np": "n_p",
    "budget_s": "budget",
    "round-budget": "round_budget",
    "coeff-bound": "coeff_bound",
    "N_test": "n_test",
    "n-test": "n_test",
    "ns-list": "ns_list",
}


@dataclass
class ExperimentConfig:
    """One solve-and-test experiment"""

    name: str = "experiment"
    case: str = "fan"
    samples: Optional[str] = None
    n_ds: int = 1000
    grid: int = 20
    n_sides: int = 4
    alpha: float = 0.9
    n_s: Optional[int] = None
    n_p: int = 10
    eps: float = 1e-6
    coeff_bound: Optional[float] = None
    budget: float = 60.0
    round_budget: float = 10.0
    seed: int = 7
    n_test: int = 100000
    pad: float = 0.05
    enclose: str = "level-set"
    methods: List[str] = field(default_factory=lambda: list(METHODS))
    ns_list: List[int] = field(default_factory=lambda: [50, 60, 70, 80, 90])
    repeats: int = 10
    search: Dict[str, Any] = field(default_factory=dict)
    engine: str = "search"
    fan: CaseIParams = field(default_factory=CaseIParams.default)
    bimodal: BimodalParams = field(default_factory=BimodalParams.default)
    enabled: bool = True
    only: bool = False

    def __post_init__(self):
        if self.n_s is None:
            self.n_s = DEFAULT_NS.get(self.case, 70)

    @classmethod
    def from_dict(cls, data: Dict, bimodal: Optional[Dict] = None) -> "ExperimentConfig":
        """Create an ExperimentConfig from a config entry

        Entries may nest the solver parameters under `params`; a global
        `bimodal` block is used unless the entry carries its own.
        """
        flat = dict(data)
        flat.update(flat.pop("params", {}) or {})
        values: Dict[str, Any] = {}
        known = {f.name for f in dataclasses.fields(cls)}
        for key, value in flat.items():
            key = ALIASES.get(key, key.replace("-", "_"))
            if key not in known:
                raise ConfigError(f"unknown config key '{key}'")
            values[key] = value

        try:
            if "fan" in values:
                values["fan"] = CaseIParams.from_dict(values["fan"])
            if "bimodal" in values:
                values["bimodal"] = BimodalParams.from_dict(values["bimodal"])
            elif bimodal:
                values["bimodal"] = BimodalParams.from_dict(bimodal)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"invalid distribution parameters: {e}")

        cfg = cls(**values)
        try:
            cfg.validate()
        except TypeError as e:
            raise ConfigError(f"config value of the wrong type: {e}")
        return cfg

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Copy with every non-None override applied; flags win over file values"""
        changes = {k: v for k, v in overrides.items() if v is not None}
        if "case" in changes and "n_s" not in changes and changes["case"] != self.case:
            changes["n_s"] = DEFAULT_NS.get(changes["case"], self.n_s)
        cfg = dataclasses.replace(self, **changes)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        def positive(name: str, value, minimum=1):
            if value is None or value < minimum:
                raise ConfigError(f"{name} must be >= {minimum}, got {value}")

        if self.case not in CASES:
            raise ConfigError(f"case must be one of {', '.join(CASES)}, got '{self.case}'")
        if self.case == "file" and not self.samples:
            raise ConfigError("case 'file' needs a samples path")
        positive("n_ds", self.n_ds)
        positive("grid", self.grid, 2)
        positive("n_sides", self.n_sides, 3)
        positive("n_s", self.n_s)
        positive("n_p", self.n_p)
        positive("n_test", self.n_test)
        positive("repeats", self.repeats, 2)
        if not 0 < self.alpha <= 1:
            raise ConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.n_s > self.grid * self.grid:
            raise ConfigError(f"n_s={self.n_s} exceeds the {self.grid * self.grid} grid cells")
        for name in ("eps", "budget", "round_budget"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.coeff_bound is not None and self.coeff_bound <= 0:
            raise ConfigError(f"coeff_bound must be positive, got {self.coeff_bound}")
        if self.pad < 0:
            raise ConfigError(f"pad must be >= 0, got {self.pad}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if not isinstance(self.engine, str) or not self.engine:
            raise ConfigError("engine must be 'search', 'auto' or a MINLP solver name")
        if self.enclose not in ENCLOSE_MODES:
            raise ConfigError(f"enclose must be one of {', '.join(ENCLOSE_MODES)}")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ConfigError(f"methods must be a nonempty subset of {', '.join(METHODS)}")
        if not self.ns_list or min(self.ns_list) < 1:
            raise ConfigError("ns_list must hold positive sample counts")
        bad = set(self.search) - {f.name for f in dataclasses.fields(SearchSettings)}
        if bad:
            raise ConfigError(f"unknown search settings: {', '.join(sorted(bad))}")

    def to_dict(self) -> Dict:
        data = dataclasses.asdict(self)
        data["fan"] = self.fan.to_dict()
        data["bimodal"] = self.bimodal.to_dict()
        data["methods"] = list(self.methods)
        data["ns_list"] = [int(v) for v in self.ns_list]
        data["search"] = dict(self.search)
        return data


class ConfigLoader:
    """Loads experiment configuration from a JSON or TOML file"""

    def __init__(self, config_file: str = "config.json"):
        self.config_file = config_file
        self.output_path: Optional[str] = None

    def _read(self) -> Dict:
        path = Path(self.config_file)
        try:
            if path.suffix == ".toml":
                with open(path, "rb") as f:
                    return tomllib.load(f)
            with open(path, "r") as f:
                return json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"config file '{self.config_file}' not found")
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON in config file: {e}")
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"invalid TOML in config file: {e}")

    def load_experiments(self) -> List[ExperimentConfig]:
        """Load experiment definitions from the config file"""
        data = self._read()
        self.output_path = data.get("output_path", "./results")
        bimodal = data.get("bimodal")

        experiments = []
        for entry in data.get("experiments", []):
            if "name" not in entry:
                raise ConfigError("missing required field 'name' in experiment entry")
            experiments.append(ExperimentConfig.from_dict(entry, bimodal=bimodal))

        names = [cfg.name for cfg in experiments]
        if len(set(names)) != len(names):
            raise ConfigError("experiment names must be unique")
        logger.info("Loaded %d experiment(s) from %s", len(experiments), self.config_file)
        return experiments

    def find(self, name: str) -> ExperimentConfig:
        for cfg in self.load_experiments():
            if cfg.name == name:
                return cfg
        raise ConfigError(f"experiment '{name}' not found in {self.config_file}")
