from importlib import resources
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
REPO = Path(__file__).resolve().parents[1]


def package_data(name: str) -> Path:
    return Path(str(resources.files("abstractclf").joinpath(f"data/{name}")))


@pytest.fixture
def fixture_train_path():
    return package_data("fixture_train.tsv")


@pytest.fixture
def fixture_validation_path():
    return package_data("fixture_validation.tsv")


@pytest.fixture
def fixture_embeddings_path():
    return package_data("fixture_embeddings.txt")


def write_fixture_config(directory: Path, drop_embeddings: bool = False) -> Path:
    """The bundled fixture run configuration, redirected to ``directory/run``."""
    text = (REPO / "configs" / "fixture.toml").read_text()
    base = REPO / "configs"
    text = text.replace('"../', f'"{base}/../').replace(
        f'output_dir = "{base}/../runs/fixture"', f'output_dir = "{directory / "run"}"')
    if drop_embeddings:
        text = text.replace("[embeddings]\n", "").replace(
            f'path = "{base}/../src/abstractclf/data/fixture_embeddings.txt"\n', "")
    path = directory / "run.toml"
    path.write_text(text)
    return path


@pytest.fixture
def fixture_config(tmp_path):
    return write_fixture_config(tmp_path)


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_runtest_logreport(report):
    # skipped acceptance criteria still get their line in the summary
    if report.skipped and "test_acceptance.py::test_c" in report.nodeid and report.when == "setup":
        number = int(report.nodeid.split("::test_c")[1][:2])
        reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else "skipped"
        _skipped.append(f"criterion {number}: SKIP  {reason.removeprefix('Skipped: ')}")


_skipped: list = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, []) + _skipped
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    key = lambda ln: int(ln.split(":")[0].split()[1])
    for line in sorted(lines, key=key):
        terminalreporter.write_line(line)
