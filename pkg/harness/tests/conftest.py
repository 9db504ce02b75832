import random
import subprocess
import sys

import pytest

NOUN_CATEGORY = {
    "pizza": "food quality",
    "pasta": "food quality",
    "salmon": "food quality",
    "waiter": "service general",
    "staff": "service general",
    "decor": "ambience general",
    "music": "ambience general",
    "wine": "drinks quality",
}
ADJ_POLARITY = {
    "delicious": "positive",
    "fresh": "positive",
    "friendly": "positive",
    "lovely": "positive",
    "bland": "negative",
    "stale": "negative",
    "rude": "negative",
    "noisy": "negative",
    "average": "neutral",
    "standard": "neutral",
}

FIXTURE_ORDERS = "[A][C][O][S],[A][O][C][S],[C][S][A][O],[O][A][S][C],[S][C][O][A]"


def build_fixture_lines(n_sentences: int = 50, seed: int = 0) -> list[str]:
    """Deterministic synthetic review sentences with gold quads, in the raw
    ####-separated format the quadkit ingest command reads."""
    rng = random.Random(seed)
    nouns = sorted(NOUN_CATEGORY)
    adjs = sorted(ADJ_POLARITY)
    lines = []
    for i in range(n_sentences):
        kind = i % 10
        if kind < 6:
            noun, adj = rng.choice(nouns), rng.choice(adjs)
            text = f"the {noun} was {adj} ."
            quads = [[noun, NOUN_CATEGORY[noun], adj, ADJ_POLARITY[adj]]]
        elif kind < 8:
            n1, n2 = rng.sample(nouns, 2)
            a1, a2 = rng.choice(adjs), rng.choice(adjs)
            text = f"the {n1} was {a1} but the {n2} was {a2} ."
            quads = [
                [n1, NOUN_CATEGORY[n1], a1, ADJ_POLARITY[a1]],
                [n2, NOUN_CATEGORY[n2], a2, ADJ_POLARITY[a2]],
            ]
        elif kind < 9:
            adj = rng.choice(adjs)
            text = f"it was {adj} overall ."
            quads = [["NULL", "restaurant general", adj, ADJ_POLARITY[adj]]]
        else:
            text = "never coming back ."
            quads = [["NULL", "restaurant general", "NULL", "negative"]]
        lines.append(f"{text}####{quads!r}")
    return lines


def run_quadkit(*args: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "quadkit.cli", *args], capture_output=True, text=True
    )


@pytest.fixture(scope="session")
def fixture_env(tmp_path_factory):
    """Raw file -> canonical JSONL -> augmented corpus, produced through the
    quadkit CLI so the harness only ever touches interchange files."""
    root = tmp_path_factory.mktemp("fixture")
    raw = root / "raw.txt"
    raw.write_text("".join(line + "\n" for line in build_fixture_lines()), encoding="utf-8")

    canonical = root / "canonical.jsonl"
    proc = run_quadkit("ingest", str(raw), "--out", str(canonical))
    assert proc.returncode == 0, proc.stderr
    assert "50 sentences" in proc.stdout

    corpus = root / "corpus.jsonl"
    proc = run_quadkit(
        "augment", "--data", str(canonical), "--out", str(corpus),
        "--orders", FIXTURE_ORDERS, "--pps-k", "5", "--pps-seed", "0",
    )
    assert proc.returncode == 0, proc.stderr
    return {
        "root": root,
        "raw": raw,
        "canonical": canonical,
        "corpus": corpus,
        "orders": FIXTURE_ORDERS.split(","),
    }
