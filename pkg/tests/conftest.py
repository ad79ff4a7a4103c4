import numpy as np
import pytest

from categoriza import TrainConfig, save_model, train_model
from categoriza.records import LabeledDocument

THEMES = {
    "4120": "cadeira mesa armário estante giratória escritório móvel gaveta",
    "4130": "computador impressora monitor teclado mouse scanner cabo rede",
    "6550": "seringa luva máscara gaze algodão curativo hospitalar agulha",
}


def build_theme_docs(per_class: int = 40, seed: int = 7) -> list[LabeledDocument]:
    """Small three-theme corpus; deterministic for a given seed."""
    rng = np.random.default_rng(seed)
    docs = []
    for code, words in THEMES.items():
        pool = words.split()
        for _ in range(per_class):
            n = int(rng.integers(3, 7))
            chosen = rng.choice(pool, size=n, replace=True)
            docs.append(LabeledDocument("aquisição de " + " ".join(chosen), code))
    rng.shuffle(docs)
    return docs


@pytest.fixture(scope="session")
def theme_docs() -> list[LabeledDocument]:
    return build_theme_docs()


@pytest.fixture(scope="session")
def theme_model(theme_docs):
    return train_model(theme_docs, TrainConfig(seed=3))


@pytest.fixture(scope="session")
def theme_model_file(theme_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "theme.bin"
    save_model(theme_model, path)
    return path
