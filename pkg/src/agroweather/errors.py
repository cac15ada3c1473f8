"""Exception hierarchy shared by every stage of the pipeline.

Each class carries an ``exit_code`` so the command line front end can map
failures to distinct process exit statuses.
"""


class AgroWeatherError(Exception):
    exit_code = 1


# ingest
class FormatError(AgroWeatherError):
    exit_code = 10


class CalendarViolation(FormatError):
    exit_code = 11


class StationMismatch(AgroWeatherError):
    exit_code = 12


class DuplicateRow(FormatError):
    exit_code = 13


# preprocess
class AllMissing(AgroWeatherError):
    exit_code = 20


class UnknownDirection(AgroWeatherError):
    exit_code = 21


class DegenerateFeature(AgroWeatherError):
    exit_code = 22


class UnknownStation(AgroWeatherError):
    exit_code = 23


class TooShort(AgroWeatherError):
    exit_code = 24


# stats
class SingularRegression(AgroWeatherError):
    exit_code = 30


# nn / training
class ShapeMismatch(AgroWeatherError):
    exit_code = 40


class NonFiniteGradient(AgroWeatherError):
    exit_code = 41


class NonFiniteUpdate(AgroWeatherError):
    exit_code = 42


class DivergenceDetected(AgroWeatherError):
    exit_code = 43


class EmptyTestSet(AgroWeatherError):
    exit_code = 44


# geo
class EmptyRegistry(AgroWeatherError):
    exit_code = 50


# advisor
class EmptyForecast(AgroWeatherError):
    exit_code = 60


class InsufficientForecast(AgroWeatherError):
    exit_code = 61


# model store
class CorruptFile(AgroWeatherError):
    exit_code = 70


class ChecksumMismatch(CorruptFile):
    exit_code = 71


class UnsupportedVersion(AgroWeatherError):
    exit_code = 72


# cli
class ConfigError(AgroWeatherError):
    exit_code = 80


class MissingArtifact(AgroWeatherError):
    exit_code = 81
