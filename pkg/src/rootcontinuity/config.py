import configparser
from pathlib import Path
from typing import NamedTuple, Optional, TypeVar

from rootcontinuity.configparser import (
    ConfigParserSection,
    ensure_known_sections,
    section_of,
)
from rootcontinuity.logger import logger
from rootcontinuity.roots import (
    DEFAULT_CLUSTER_TOL,
    DEFAULT_MAX_ITER,
    DEFAULT_SEED,
    DEFAULT_TOL,
    RootFinderOptions,
)

# Fuzzing draws deformations at safety * delta_sup; below 1 every trial
# is covered by the certificate.
DEFAULT_SAFETY = 0.9

# Allowance for root-finder error when a fuzz trial judges a conclusion.
ALIGNMENT_SLACK = 1e-7

DEFAULT_WORKERS = 1
DEFAULT_ESTIMATE_LEVELS = 20

KNOWN_SECTIONS = ("roots", "fuzz")

T = TypeVar("T")


class RootsConfig(NamedTuple):
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    seed: int = DEFAULT_SEED
    cluster_tol: float = DEFAULT_CLUSTER_TOL

    @classmethod
    def from_configparser(cls, section: ConfigParserSection) -> "RootsConfig":
        seed = section.getint("seed", fallback=DEFAULT_SEED)
        if seed < 0:
            raise RuntimeError("[roots] 'seed' must be non-negative, got %s" % seed)
        return cls(
            tol=section.getpositivefloat("tol", fallback=DEFAULT_TOL),
            max_iter=section.getpositiveint("max_iter", fallback=DEFAULT_MAX_ITER),
            seed=seed,
            cluster_tol=section.getpositivefloat(
                "cluster_tol", fallback=DEFAULT_CLUSTER_TOL
            ),
        )

    def with_overrides(
        self,
        tol: Optional[float] = None,
        max_iter: Optional[int] = None,
        seed: Optional[int] = None,
        cluster_tol: Optional[float] = None,
    ) -> "RootsConfig":
        return type(self)(
            tol=first_not_none(tol, self.tol),
            max_iter=first_not_none(max_iter, self.max_iter),
            seed=first_not_none(seed, self.seed),
            cluster_tol=first_not_none(cluster_tol, self.cluster_tol),
        )

    def finder_options(self) -> RootFinderOptions:
        return RootFinderOptions(max_iter=self.max_iter, tol=self.tol, seed=self.seed)


class FuzzConfig(NamedTuple):
    safety: float = DEFAULT_SAFETY
    slack: float = ALIGNMENT_SLACK
    workers: int = DEFAULT_WORKERS
    estimate_levels: int = DEFAULT_ESTIMATE_LEVELS

    @classmethod
    def from_configparser(cls, section: ConfigParserSection) -> "FuzzConfig":
        slack = section.getfloat("slack", fallback=ALIGNMENT_SLACK)
        if not (slack >= 0):
            raise RuntimeError("[fuzz] 'slack' must be non-negative, got %s" % slack)
        return cls(
            safety=section.getpositivefloat("safety", fallback=DEFAULT_SAFETY),
            slack=slack,
            workers=section.getpositiveint("workers", fallback=DEFAULT_WORKERS),
            estimate_levels=section.getpositiveint(
                "estimate_levels", fallback=DEFAULT_ESTIMATE_LEVELS
            ),
        )


class ParsedConfig(NamedTuple):
    roots: RootsConfig = RootsConfig()
    fuzz: FuzzConfig = FuzzConfig()


def parse_config(config_path: Optional[Path]) -> ParsedConfig:
    config = configparser.ConfigParser(interpolation=None)
    if config_path is not None:
        try:
            config.read_string(config_path.read_text(), source=str(config_path))
        except Exception as e:
            raise RuntimeError("Unable to parse %s:\n%s" % (config_path, e))
        logger.debug("Read config from %s", config_path)

    ensure_known_sections(config, KNOWN_SECTIONS)

    roots_section = section_of(config, "roots")
    roots = RootsConfig.from_configparser(roots_section)
    roots_section.ensure_no_unused_keys()

    fuzz_section = section_of(config, "fuzz")
    fuzz = FuzzConfig.from_configparser(fuzz_section)
    fuzz_section.ensure_no_unused_keys()

    return ParsedConfig(roots=roots, fuzz=fuzz)


def first_not_none(value: Optional[T], default: T) -> T:
    return default if value is None else value
