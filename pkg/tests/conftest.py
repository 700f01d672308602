import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import synthcorpus
from offspeech import embedding, hatemodel, textnorm


@pytest.fixture(scope="session")
def norm_cfg():
    return textnorm.default_config()


@pytest.fixture(scope="session")
def small_model():
    """Two-cluster embedding used wherever a trained model is needed."""
    sentences = synthcorpus.two_cluster_sentences(seed=101, n=800)
    cfg = embedding.TrainConfig(dim=24, window=3, negative_samples=5, epochs=3,
                                subsample_threshold=0.0, seed=12345)
    return embedding.train(sentences, cfg, min_count=1)


@pytest.fixture(scope="session")
def nasty_lexicon(norm_cfg):
    entries = [(w, "hate") for w in synthcorpus.NASTY_WORDS[:8]]
    entries += [(w, "offensive") for w in synthcorpus.NASTY_WORDS[8:]]
    entries += [("unseenword1", "hate"), ("unseenword2", "offensive")]
    return hatemodel.OffensiveLexicon.from_entries(entries, norm_cfg)


@pytest.fixture(scope="session")
def hate_vector(small_model, nasty_lexicon):
    return hatemodel.build_hate_vector(nasty_lexicon, small_model)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance pass/fail lines where they are easy to find."""
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
