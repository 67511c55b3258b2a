import configparser
from typing import Any, Callable, Sequence


def ensure_known_sections(
    config: configparser.ConfigParser, known: Sequence[str]
) -> None:
    unknown = set(config.sections()) - set(known)
    if unknown:
        raise RuntimeError(
            "Unknown sections %s, expected some of: %s"
            % (sorted(unknown), ", ".join(known))
        )


def section_of(config: configparser.ConfigParser, name: str) -> "ConfigParserSection":
    # A missing section means "all defaults".
    if not config.has_section(name):
        config.add_section(name)
    return ConfigParserSection(config[name])


class ConfigParserSection:
    def __init__(self, section: configparser.SectionProxy) -> None:
        self.__section = section
        self.__unused_keys = set(section.keys())

    @property
    def name(self) -> str:
        return self.__section.name

    def ensure_no_unused_keys(self) -> None:
        if self.__unused_keys:
            raise RuntimeError(
                "Unknown options in the [%s] section: %s"
                % (self.__section.name, sorted(self.__unused_keys))
            )

    def _lookup(self, getter: Callable[..., Any], option: str, fallback: Any) -> Any:
        self.__unused_keys.discard(option)
        try:
            return getter(option, fallback=fallback)
        except ValueError as e:
            raise RuntimeError(
                "[%s] %r option has an invalid value: %s" % (self.name, option, e)
            )

    def getint(self, option: str, *, fallback: int) -> int:
        return self._lookup(self.__section.getint, option, fallback)

    def getfloat(self, option: str, *, fallback: float) -> float:
        return self._lookup(self.__section.getfloat, option, fallback)

    def getpositivefloat(self, option: str, *, fallback: float) -> float:
        value = self.getfloat(option, fallback=fallback)
        if not (value > 0):
            raise RuntimeError(
                "[%s] %r must be positive, got %s" % (self.name, option, value)
            )
        return value

    def getpositiveint(self, option: str, *, fallback: int) -> int:
        value = self.getint(option, fallback=fallback)
        if value < 1:
            raise RuntimeError(
                "[%s] %r must be a positive integer, got %s" % (self.name, option, value)
            )
        return value
