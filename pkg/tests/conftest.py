import random
from pathlib import Path

import pytest

from quadkit.core import NULL, POLARITIES, Quad, Sentence
from quadkit.dataset_io import parse_dataset_file

DATA_DIR = Path(__file__).parent / "data"

# Candidate pools for randomly generated quads. Values avoid bracketed
# markers, the literal "it" and leading/trailing whitespace so that the
# render/parse round trip is well defined.
WORDS = [
    "pizza", "pasta", "wine", "staff", "decor", "music", "menu", "salmon",
    "tables", "bread", "cheap", "fresh", "stale", "warm", "cold", "friendly",
    "slow", "tasty", "bland", "loud",
]
CATEGORIES = [
    "food quality", "food prices", "service general", "ambience general",
    "drinks quality", "restaurant general",
]


@pytest.fixture(scope="session")
def toy_dataset():
    return parse_dataset_file(DATA_DIR / "toy_train.txt", name="toy", split="train")


def make_random_quad(rng: random.Random) -> Quad:
    def span() -> str:
        if rng.random() < 0.2:
            return NULL
        return " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 3)))

    return Quad(
        aspect=span(),
        category=rng.choice(CATEGORIES),
        opinion=span(),
        polarity=rng.choice(POLARITIES),
    )


def make_random_sentence(rng: random.Random, sid: str) -> Sentence:
    text = " ".join(rng.choice(WORDS) for _ in range(rng.randint(3, 8))) + "."
    return Sentence(id=sid, text=text)
