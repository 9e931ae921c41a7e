import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_log  # noqa: E402

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def toy_vocab():
    from symscene.detection import load_vocabulary

    return load_vocabulary(DATA_DIR / "classes_toy.txt", DATA_DIR / "attributes_toy.txt")


@pytest.fixture(scope="session")
def toy_table():
    from symscene.embeddings import load_table

    return load_table(DATA_DIR / "embeddings_toy.txt")


@pytest.fixture(scope="session")
def toy_scenes(toy_vocab):
    from symscene.detection import load_scenes

    return load_scenes(
        DATA_DIR / "scenes_toy.jsonl", toy_vocab.num_classes, toy_vocab.num_attributes
    )


@pytest.fixture(scope="session")
def toy_config():
    from symscene.config import Config

    return Config(
        num_classes=12,
        num_attributes=8,
        embedding_dim=6,
        top_k=5,
        score_threshold=0.2,
        iou_threshold=0.5,
        max_objects=100,
        attr_threshold=0.5,
    )


@pytest.fixture(scope="session", autouse=True)
def _suite_timer():
    start = time.monotonic()
    yield
    elapsed = time.monotonic() - start
    within = elapsed < 60.0
    acceptance_log.record("9b", f"whole suite finished in {elapsed:.1f}s (< 60s)", within)
    assert within, f"test suite took {elapsed:.1f}s, budget is 60s"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance checks")
    for number, description, passed in sorted(
        acceptance_log.RESULTS, key=lambda r: (len(r[0]), r[0])
    ):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {description}")
