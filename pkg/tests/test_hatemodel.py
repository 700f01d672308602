import numpy as np
import pytest

import synthcorpus
from offspeech import embedding, hatemodel, textnorm
from offspeech.corpus import RawComment
from offspeech.errors import NoLexiconWordInVocabulary, ProvenanceMismatch


def manual_model(words, matrix):
    """Model with hand-picked vectors, bypassing training."""
    vocab = embedding.Vocabulary(words, [100] * len(words), 1)
    mat = np.asarray(matrix, dtype=np.float32)
    return embedding.EmbeddingModel(mat.shape[1], vocab, mat)


def loop_transform_oracle(text, model, hv, cfg):
    """Independent per-token recomputation of the max-cosine transform."""
    tokens = textnorm.normalize(text, cfg)
    if not tokens:
        return 0.0
    best = None
    for tok in tokens:
        vec = model.vector(tok)
        if vec is None:
            c = 0.0
        else:
            c = embedding.cosine(vec.astype(np.float64), hv.h)
        if best is None or c > best:
            best = c
    return best


class TestLexicon:
    def test_entries_are_lemmatized_and_deduplicated(self, norm_cfg):
        lex = hatemodel.OffensiveLexicon.from_entries(
            [("Slurs", "hate"), ("slur", "offensive"), ("snarling insult", "hate")],
            norm_cfg,
        )
        assert lex.words == ["slur", "snarl", "insult"]
        assert lex.tags["slur"] == "hate"  # first tag wins

    def test_empty_entries_counted(self, norm_cfg):
        lex = hatemodel.OffensiveLexicon.from_entries(
            [("the", "hate"), ("insult", "hate")], norm_cfg)
        assert lex.skipped_empty == 1
        assert lex.words == ["insult"]

    def test_all_empty_raises(self, norm_cfg):
        with pytest.raises(ValueError):
            hatemodel.OffensiveLexicon.from_entries([("the", "hate")], norm_cfg)

    def test_file_loading(self, tmp_path, norm_cfg):
        p = tmp_path / "lex.txt"
        p.write_text("# header\ninsult\n\nsnarl\n", encoding="utf-8")
        lex = hatemodel.OffensiveLexicon.from_files([(p, "hate")], norm_cfg)
        assert lex.words == ["insult", "snarl"]

    def test_content_hash_changes_with_words(self, norm_cfg):
        a = hatemodel.OffensiveLexicon.from_entries([("insult", "hate")], norm_cfg)
        b = hatemodel.OffensiveLexicon.from_entries([("snarl", "hate")], norm_cfg)
        assert a.content_hash() != b.content_hash()


class TestHateVector:
    def test_mean_of_one(self, norm_cfg):
        model = manual_model(["w1", "w2"], [[1.0, 2.0], [3.0, 4.0]])
        lex = hatemodel.OffensiveLexicon(["w1"], {"w1": "hate"})
        hv = hatemodel.build_hate_vector(lex, model)
        assert np.allclose(hv.h, [1.0, 2.0])
        assert hv.contributing_count == 1

    def test_two_point_mean(self):
        model = manual_model(["w1", "w2"], [[1.0, 0.0], [0.0, 1.0]])
        lex = hatemodel.OffensiveLexicon(["w1", "w2"], {"w1": "a", "w2": "b"})
        hv = hatemodel.build_hate_vector(lex, model)
        assert np.array_equal(hv.h, [0.5, 0.5])
        assert hv.contributing_count == 2

    def test_oov_skip_and_bruteforce_mean(self):
        rng = np.random.Generator(np.random.PCG64(8))
        words = [f"w{i}" for i in range(40)]
        mat = rng.normal(size=(40, 12))
        model = manual_model(words, mat)
        lex_words = words[:40] + [f"oov{i}" for i in range(10)]
        lex = hatemodel.OffensiveLexicon(lex_words, {w: "hate" for w in lex_words})
        hv = hatemodel.build_hate_vector(lex, model)
        assert hv.contributing_count == 40
        assert hv.missing_count == 10
        total = np.zeros(12)
        for i in range(40):
            total += model.input_vectors[i].astype(np.float64)
        assert np.max(np.abs(hv.h - total / 40)) < 1e-12

    def test_no_word_in_vocabulary(self):
        model = manual_model(["w1"], [[1.0, 0.0]])
        lex = hatemodel.OffensiveLexicon(["absent"], {"absent": "hate"})
        with pytest.raises(NoLexiconWordInVocabulary):
            hatemodel.build_hate_vector(lex, model)

    def test_roundtrip(self, tmp_path, small_model, hate_vector):
        path = tmp_path / "hv.json"
        hatemodel.save_hate_vector(hate_vector, path)
        loaded = hatemodel.load_hate_vector(path)
        assert np.array_equal(loaded.h, hate_vector.h)
        assert loaded.contributing_count == hate_vector.contributing_count
        assert loaded.embedding_hash == hate_vector.embedding_hash
        assert loaded.lexicon_hash == hate_vector.lexicon_hash


class TestTransform:
    def test_lexicon_word_scores_one(self, norm_cfg):
        model = manual_model(["insult", "flower"], [[1.0, 2.0], [-3.0, 0.5]])
        lex = hatemodel.OffensiveLexicon(["insult"], {"insult": "hate"})
        hv = hatemodel.build_hate_vector(lex, model)
        assert hatemodel.transform("insult", model, hv, norm_cfg) == pytest.approx(1.0, abs=1e-9)

    def test_all_oov_scores_zero(self, small_model, hate_vector, norm_cfg):
        assert hatemodel.transform("zzz qqq www1", small_model, hate_vector, norm_cfg) == 0.0

    def test_empty_after_normalization_scores_zero(self, small_model, hate_vector, norm_cfg):
        assert hatemodel.transform("the and of", small_model, hate_vector, norm_cfg) == 0.0
        assert hatemodel.transform("", small_model, hate_vector, norm_cfg) == 0.0

    def test_positive_scalar_multiple_scores_one(self, norm_cfg):
        model = manual_model(["insult", "mult"], [[1.0, 2.0], [2.0, 4.0]])
        lex = hatemodel.OffensiveLexicon(["insult"], {"insult": "hate"})
        hv = hatemodel.build_hate_vector(lex, model)
        assert hatemodel.transform("mult", model, hv, norm_cfg) == pytest.approx(1.0, abs=1e-12)

    def test_matches_loop_oracle(self, small_model, hate_vector, norm_cfg):
        rng = synthcorpus.rng_for(77)
        vocab_words = small_model.vocab.words + ["oovtokenx", "oovtokeny"]
        for _ in range(200):
            words = rng.choice(vocab_words, size=20)
            text = " ".join(words)
            got = hatemodel.transform(text, small_model, hate_vector, norm_cfg)
            want = loop_transform_oracle(text, small_model, hate_vector, norm_cfg)
            assert abs(got - want) < 1e-12

    def test_scorer_equals_transform(self, small_model, hate_vector, norm_cfg):
        scorer = hatemodel.Scorer(small_model, hate_vector, norm_cfg)
        rng = synthcorpus.rng_for(78)
        for _ in range(200):
            text = " ".join(rng.choice(small_model.vocab.words, size=12))
            assert scorer.transform(text) == pytest.approx(
                hatemodel.transform(text, small_model, hate_vector, norm_cfg), abs=1e-12)

    def test_provenance_mismatch(self, small_model, hate_vector, norm_cfg):
        other = embedding.train(
            synthcorpus.two_cluster_sentences(5, n=60),
            embedding.TrainConfig(dim=8, epochs=1, subsample_threshold=0.0, seed=99),
            min_count=1,
        )
        with pytest.raises(ProvenanceMismatch):
            hatemodel.transform("anything here", other, hate_vector, norm_cfg)
        with pytest.raises(ProvenanceMismatch):
            hatemodel.Scorer(other, hate_vector, norm_cfg)

    def test_token_permutation_invariance(self, small_model, hate_vector, norm_cfg):
        rng = synthcorpus.rng_for(79)
        words = list(rng.choice(small_model.vocab.words, size=15))
        base = hatemodel.transform(" ".join(words), small_model, hate_vector, norm_cfg)
        for _ in range(5):
            rng.shuffle(words)
            assert hatemodel.transform(" ".join(words), small_model, hate_vector, norm_cfg) == base

    def test_appending_tokens_never_decreases(self, small_model, hate_vector, norm_cfg):
        rng = synthcorpus.rng_for(80)
        for _ in range(30):
            words = list(rng.choice(small_model.vocab.words, size=5))
            base = hatemodel.transform(" ".join(words), small_model, hate_vector, norm_cfg)
            extra = " ".join(words + [str(rng.choice(small_model.vocab.words))])
            assert hatemodel.transform(extra, small_model, hate_vector, norm_cfg) >= base

    def test_deleting_argmax_never_increases(self, small_model, hate_vector, norm_cfg):
        scorer = hatemodel.Scorer(small_model, hate_vector, norm_cfg)
        rng = synthcorpus.rng_for(81)
        for _ in range(30):
            words = list(rng.choice(small_model.vocab.words, size=8))
            base = scorer.transform(" ".join(words))
            scores = [scorer.transform(w) for w in words]
            best = int(np.argmax(scores))
            rest = words[:best] + words[best + 1:]
            assert scorer.transform(" ".join(rest)) <= base + 1e-15

    def test_score_in_range(self, small_model, hate_vector, norm_cfg):
        rng = synthcorpus.rng_for(82)
        for _ in range(100):
            text = " ".join(rng.choice(small_model.vocab.words, size=10))
            s = hatemodel.transform(text, small_model, hate_vector, norm_cfg)
            assert -1.0 - 1e-12 <= s <= 1.0 + 1e-12

    def test_distance_computation_counter(self, small_model, hate_vector, norm_cfg):
        counter = hatemodel.TransformCounter()
        scorer = hatemodel.Scorer(small_model, hate_vector, norm_cfg, counter=counter)
        words = small_model.vocab.words[:6] + ["oovword1"]
        text = " ".join(words)
        n_tokens = len(textnorm.normalize(text, norm_cfg))
        scorer.transform(text)
        # one distance computation per in-vocabulary token: O(|S|)
        assert counter.distance_computations == 6
        assert counter.distance_computations <= n_tokens
        assert counter.comments == 1


def _comment(i, body):
    return RawComment(f"c{i}", "a", "s", body, 0, 1420070400)


class TestScoreCorpus:
    def test_empty_stream(self, small_model, hate_vector, norm_cfg):
        assert list(hatemodel.score_corpus([], small_model, hate_vector, norm_cfg)) == []

    def test_matches_transform_oracle(self, small_model, hate_vector, norm_cfg):
        rng = synthcorpus.rng_for(83)
        comments = [
            _comment(i, " ".join(rng.choice(small_model.vocab.words, size=8)))
            for i in range(500)
        ]
        scored = list(hatemodel.score_corpus(comments, small_model, hate_vector, norm_cfg))
        assert len(scored) == 500
        for comment, score in scored:
            want = hatemodel.transform(comment.body, small_model, hate_vector, norm_cfg)
            assert score == pytest.approx(want, abs=1e-12)

    def test_permuted_shards_same_multiset(self, small_model, hate_vector, norm_cfg):
        rng = synthcorpus.rng_for(84)
        comments = [
            _comment(i, " ".join(rng.choice(small_model.vocab.words, size=6)))
            for i in range(200)
        ]
        base = sorted(s for _, s in hatemodel.score_corpus(
            comments, small_model, hate_vector, norm_cfg))
        shuffled = list(comments)
        rng.shuffle(shuffled)
        perm = sorted(s for _, s in hatemodel.score_corpus(
            shuffled, small_model, hate_vector, norm_cfg))
        assert base == perm

    def test_order_stable_within_shard(self, small_model, hate_vector, norm_cfg):
        comments = [_comment(i, f"{small_model.vocab.words[i]} filler words") for i in range(5)]
        got = [c.id for c, _ in hatemodel.score_corpus(
            comments, small_model, hate_vector, norm_cfg)]
        assert got == [c.id for c in comments]
