import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from advemoji.attack import AttackConfig, CandidatePair
from advemoji.errors import CheckpointError
from advemoji.lexicon import (EmojiSequence, SequenceSpaceConfig,
                              load_lexicon)
from advemoji.oracles import Oracle, Prediction
from advemoji.policy import (Policy, RewardTrace, TrainConfig,
                             _corpus_nll_and_grads, attention_pool,
                             build_vocabulary, combined_loss, copy_policy,
                             elp_transform, load_policy, modality_mask,
                             random_candidates, rank_candidates, reward,
                             rl_train, sample_sequence, save_policy,
                             smooth_reward, supervised_pretrain)
from conftest import TOY_LEXICON_JSONL


@pytest.fixture
def toy_policy(toy_lexicon):
    return Policy(toy_lexicon, SequenceSpaceConfig(1, 2))


def randomized(policy, seed=0, scale=0.4):
    rng = np.random.default_rng(seed)
    policy.theta = rng.normal(0, scale, policy.theta.shape)
    policy.elp_w = 2.0 * np.eye(policy.n_emoji) + rng.normal(
        0, 0.1, (policy.n_emoji, policy.n_emoji))
    policy.elp_b = rng.normal(0, 0.1, policy.n_emoji)
    return policy


class TestVocabulary:
    def test_namespaced_ids(self, toy_lexicon):
        vocab = build_vocabulary(["the", "a", "movie"], toy_lexicon)
        assert vocab.n_text == 3 and vocab.n_emoji == 4
        assert vocab.id_of_text("movie") == 2
        assert vocab.id_of_emoji_surface("😀") == 3
        assert vocab.modality_of(2) == "text"
        assert vocab.modality_of(3) == "emoji"

    def test_disjoint_ranges(self, lexicon):
        vocab = build_vocabulary(["x", "y"], lexicon)
        ids = set(range(len(vocab)))
        text_ids = {vocab.id_of_text(t) for t in vocab.text_tokens}
        emoji_ids = {vocab.id_of_emoji_surface(s)
                     for s in vocab.emoji_surfaces}
        assert text_ids | emoji_ids == ids
        assert not text_ids & emoji_ids

    def test_surface_round_trip(self, lexicon):
        vocab = build_vocabulary(["alpha", "beta"], lexicon)
        for t in vocab.text_tokens:
            assert vocab.surface_of(vocab.id_of_text(t)) == t
        for s in vocab.emoji_surfaces:
            assert vocab.surface_of(vocab.id_of_emoji_surface(s)) == s

    def test_empty_lexicon_rejected(self):
        from advemoji.lexicon import EmojiLexicon
        with pytest.raises(ValueError):
            build_vocabulary(["x"], EmojiLexicon(tokens=[]))


class TestModalityMask:
    def test_all_text_is_zero(self):
        m = modality_mask(["text"] * 4, 0.7)
        assert np.array_equal(m, np.zeros((4, 4)))

    def test_hand_case(self):
        m = modality_mask(["text", "emoji"], 0.5)
        assert np.array_equal(m, np.array([[0.0, 0.5], [0.5, 0.0]]))

    def test_beta_zero_collapses(self):
        m = modality_mask(["text", "emoji", "text"], 0.0)
        assert np.array_equal(m, np.zeros((3, 3)))

    def test_symmetric(self):
        m = modality_mask(["text", "emoji", "emoji", "text"], 1.3)
        assert np.array_equal(m, m.T)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            modality_mask([], 0.5)

    def test_attention_pool_uses_mask(self, rng):
        feats = rng.normal(size=(3, 5))
        pooled_same = attention_pool(feats, ["text"] * 3, 2.0)
        pooled_cross = attention_pool(feats, ["text", "emoji", "text"], 2.0)
        assert pooled_same.shape == (3, 5)
        assert not np.allclose(pooled_same, pooled_cross)


class TestElp:
    def test_identity_uniform_passthrough(self):
        p = np.full(4, 0.25)
        out = elp_transform(p, np.eye(4), np.zeros(4))
        assert np.max(np.abs(out - 0.25)) < 1e-9

    def test_large_bias_concentrates(self):
        p = np.full(4, 0.25)
        b = np.array([10.0, 0.0, 0.0, 0.0])
        out = elp_transform(p, np.zeros((4, 4)), b)
        expected = math.exp(10) / (math.exp(10) + 3)
        assert out[0] == pytest.approx(expected, abs=1e-12)
        assert out[0] > 0.99

    @given(st.lists(st.floats(0.05, 1.0), min_size=2, max_size=6))
    @settings(max_examples=100, deadline=None)
    def test_output_is_distribution(self, raw):
        p = np.array(raw)
        p /= p.sum()
        n = p.size
        rng = np.random.default_rng(int(p.sum() * 1e6) % 2**31)
        out = elp_transform(p, rng.normal(size=(n, n)), rng.normal(size=n))
        assert abs(out.sum() - 1.0) < 1e-9
        assert (out > 0).all()

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            elp_transform(np.full(3, 1 / 3), np.eye(4), np.zeros(4))

    def test_non_distribution_rejected(self):
        with pytest.raises(ValueError):
            elp_transform(np.array([0.5, 0.2]), np.eye(2), np.zeros(2))


class TestSupervisedPretrain:
    def test_memorizes_single_pair(self, toy_lexicon):
        policy = Policy(toy_lexicon, SequenceSpaceConfig(1, 2))
        seq = EmojiSequence((0, 2))
        _, trace = supervised_pretrain(
            policy, [("positive", seq)],
            TrainConfig(epochs=300, learning_rate=2.0))
        assert trace[-1] < 0.05
        lp = policy.sequence_log_prob("positive", "prefix", seq)
        assert math.exp(lp) > 0.95

    def test_uniform_init_first_loss(self, toy_policy):
        seq = EmojiSequence((0, 2))
        _, trace = supervised_pretrain(
            toy_policy, [("positive", seq)],
            TrainConfig(epochs=1, learning_rate=0.1))
        assert trace[0] == pytest.approx(2 * math.log(4), abs=1e-9)

    def test_final_loss_not_above_initial(self, toy_lexicon):
        policy = randomized(Policy(toy_lexicon, SequenceSpaceConfig(1, 2)))
        corpus = [("positive", EmojiSequence((0, 2))),
                  ("negative", EmojiSequence((1, 1))),
                  ("neutral", EmojiSequence((3,)))]
        _, trace = supervised_pretrain(
            policy, corpus, TrainConfig(epochs=40, learning_rate=1.0))
        assert trace[-1] <= trace[0]

    def test_token_outside_vocabulary_rejected(self, toy_policy):
        with pytest.raises(ValueError):
            supervised_pretrain(toy_policy,
                                [("positive", EmojiSequence((9,)))],
                                TrainConfig(epochs=1))

    def test_nll_is_non_negative(self, toy_lexicon):
        # softmax probabilities never exceed 1, so the loss cannot go below 0
        for seed in range(5):
            policy = randomized(Policy(toy_lexicon, SequenceSpaceConfig(1, 2)),
                                seed=seed, scale=2.0)
            items = [("positive", policy.sequence_local(EmojiSequence((0, 2))))]
            loss, _ = _corpus_nll_and_grads(policy, items, False)
            assert loss >= 0.0

    def test_sequence_length_outside_space_rejected(self, toy_policy):
        with pytest.raises(ValueError):
            supervised_pretrain(toy_policy,
                                [("positive", EmojiSequence((0, 0, 0)))],
                                TrainConfig(epochs=1))

    def test_gradient_matches_central_differences(self, toy_lexicon):
        policy = randomized(Policy(toy_lexicon, SequenceSpaceConfig(1, 2)),
                            seed=3)
        corpus = [("positive", EmojiSequence((0, 2))),
                  ("negative", EmojiSequence((1,)))]
        items = [(s, policy.sequence_local(q)) for s, q in corpus]
        _, grads = _corpus_nll_and_grads(policy, items, True)
        eps = 1e-6

        def fd(get, set_):
            orig = get().copy()
            out = np.zeros_like(orig)
            it = np.nditer(orig, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                arr = orig.copy()
                arr[idx] = orig[idx] + eps
                set_(arr)
                up, _ = _corpus_nll_and_grads(policy, items, False)
                arr[idx] = orig[idx] - eps
                set_(arr)
                dn, _ = _corpus_nll_and_grads(policy, items, False)
                out[idx] = (up - dn) / (2 * eps)
            set_(orig)
            return out

        for name, get, set_ in (
                ("b", lambda: policy.elp_b,
                 lambda a: setattr(policy, "elp_b", a)),
                ("W", lambda: policy.elp_w,
                 lambda a: setattr(policy, "elp_w", a)),
                ("theta", lambda: policy.theta,
                 lambda a: setattr(policy, "theta", a))):
            numeric = fd(get, set_)
            analytic = -grads[name]  # grads are the ascent direction
            denom = max(np.max(np.abs(numeric)), 1e-12)
            rel = np.max(np.abs(numeric - analytic)) / denom
            assert rel < 1e-4, f"{name}: rel error {rel}"


class TestSampling:
    def test_degenerate_policy(self, toy_lexicon):
        policy = Policy(toy_lexicon, SequenceSpaceConfig(1, 2))
        policy.elp_b = np.array([0.0, 0.0, 60.0, 0.0])  # all mass on ":)"
        seq, lp = sample_sequence(policy, "positive", "prefix", 2, rng=1)
        assert seq.tokens == (2, 2)
        assert lp == pytest.approx(0.0, abs=1e-9)

    def test_uniform_log_prob(self, toy_policy):
        seq, lp = sample_sequence(toy_policy, "neutral", "suffix", 2, rng=5)
        assert lp == pytest.approx(-2 * math.log(4), abs=1e-12)

    def test_out_of_bounds_length(self, toy_policy):
        with pytest.raises(ValueError):
            sample_sequence(toy_policy, "positive", "prefix", 3, rng=0)
        with pytest.raises(ValueError):
            sample_sequence(toy_policy, "positive", "prefix", 0, rng=0)

    def test_deterministic_given_seed(self, toy_policy):
        a = [sample_sequence(toy_policy, "positive", "prefix", 2, rng=9)
             for _ in range(5)]
        b = [sample_sequence(toy_policy, "positive", "prefix", 2, rng=9)
             for _ in range(5)]
        assert a == b

    def test_sampling_frequencies_within_3_sigma(self, toy_lexicon):
        policy = randomized(Policy(toy_lexicon, SequenceSpaceConfig(1, 1)),
                            seed=8)
        q = policy.step_distribution("positive", "prefix", 0, None)
        rng = np.random.default_rng(123)
        n = 10_000
        counts = np.zeros(4)
        for _ in range(n):
            seq, _ = sample_sequence(policy, "positive", "prefix", 1, rng)
            counts[policy.local_index(seq.tokens[0])] += 1
        for j in range(4):
            sigma = math.sqrt(n * q[j] * (1 - q[j]))
            assert abs(counts[j] - n * q[j]) <= 3 * sigma + 1e-9

    def test_masked_sampling_stays_in_subspace(self, lexicon):
        policy = Policy(lexicon, SequenceSpaceConfig(1, 4))
        allowed = policy.allowed_mask("negative")
        rng = np.random.default_rng(0)
        for _ in range(20):
            seq, _ = sample_sequence(policy, "negative", "prefix", 4, rng,
                                     allowed=allowed)
            assert all(lexicon.token_sentiment(t) == "negative"
                       for t in seq.tokens)


class FixedOracle(Oracle):
    """Hard-label oracle with a scripted flip decision."""

    name = "fixed"

    def __init__(self, flips, no_flip_label="y"):
        super().__init__()
        self.flips = flips
        self.no_flip_label = no_flip_label

    def _predict(self, text):
        return Prediction(
            label="flipped" if self.flips(text) else self.no_flip_label)


class TestReward:
    def test_hard_flip_alpha_only(self, toy_policy):
        pair = CandidatePair(prefix=EmojiSequence((0,)),
                             suffix=EmojiSequence((2,)))
        cfg = TrainConfig(alpha_reward=1.0, beta_reward=0.0,
                          require_consistency=False)
        r = reward("x", "y", pair, FixedOracle(lambda t: True), toy_policy,
                   cfg, x_sentiment="positive")
        assert r == 1.0

    def test_uniform_entropy_beta_only(self, toy_policy):
        pair = CandidatePair(prefix=EmojiSequence((0,)),
                             suffix=EmojiSequence((2,)))
        cfg = TrainConfig(alpha_reward=0.0, beta_reward=1.0,
                          require_consistency=False)
        r = reward("x", "y", pair, FixedOracle(lambda t: False), toy_policy,
                   cfg, x_sentiment="positive")
        assert r == pytest.approx(1.0, abs=1e-9)

    def test_balanced_flip_deterministic_policy(self, toy_lexicon):
        policy = Policy(toy_lexicon, SequenceSpaceConfig(1, 2))
        policy.elp_b = np.array([0.0, 0.0, 200.0, 0.0])
        pair = CandidatePair(prefix=EmojiSequence((2,)),
                             suffix=EmojiSequence((2,)))
        cfg = TrainConfig(alpha_reward=0.5, beta_reward=0.5,
                          require_consistency=False)
        r = reward("x", "y", pair, FixedOracle(lambda t: True), policy, cfg,
                   x_sentiment="positive")
        assert r == pytest.approx(0.5, abs=1e-6)

    def test_soft_mode_uses_tanh(self, toy_policy):
        class Soft(Oracle):
            name = "soft"

            def _predict(self, text):
                return Prediction(label="y",
                                  probs={"y": 0.25, "z": 0.5, "w": 0.25})

        pair = CandidatePair(prefix=EmojiSequence((0,)),
                             suffix=EmojiSequence((2,)))
        cfg = TrainConfig(alpha_reward=1.0, beta_reward=0.0,
                          require_consistency=False)
        r = reward("x", "y", pair, Soft(), toy_policy, cfg,
                   x_sentiment="positive")
        assert r == pytest.approx(math.tanh(math.log(2)), abs=1e-12)


class TestSmoothing:
    def test_k1_identity(self):
        raw = [0.3, -0.2, 0.9]
        assert smooth_reward(raw, 1) == raw

    def test_constant_stays_constant(self):
        assert smooth_reward([0.5] * 6, 4) == [0.5] * 6

    def test_partial_windows(self):
        assert smooth_reward([0.0, 1.0, 2.0], 3) == \
            pytest.approx([0.0, 0.5, 1.0], abs=1e-9)

    def test_window_slides(self):
        assert smooth_reward([0, 0, 0, 3.0], 2) == \
            pytest.approx([0.0, 0.0, 0.0, 1.5])

    def test_invalid_window(self):
        with pytest.raises(ValueError):
            smooth_reward([1.0], 0)

    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=20),
           st.lists(st.floats(-5, 5), min_size=1, max_size=20),
           st.integers(1, 6), st.floats(-3, 3))
    @settings(max_examples=100, deadline=None)
    def test_linearity(self, r1, r2, k, a):
        n = min(len(r1), len(r2))
        r1, r2 = r1[:n], r2[:n]
        combined = smooth_reward([a * x + y for x, y in zip(r1, r2)], k)
        split = [a * x + y for x, y in zip(smooth_reward(r1, k),
                                           smooth_reward(r2, k))]
        assert combined == pytest.approx(split, abs=1e-9)


class TestCombinedLoss:
    def test_lambda_collapse(self):
        assert combined_loss(1.7, 9.0, -3.0, 0.0, 0.0) == 1.7

    def test_arithmetic(self):
        assert combined_loss(1.0, 2.0, 3.0, 0.5, 0.1) == \
            pytest.approx(2.3, abs=1e-12)

    def test_zeros(self):
        assert combined_loss(0.0, 0.0, 0.0, 1.0, 1.0) == 0.0

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            combined_loss(float("inf"), 0.0, 0.0, 1.0, 1.0)


class TestRlTrain:
    def test_constant_reward_leaves_parameters_unchanged(self, toy_lexicon):
        policy = randomized(Policy(toy_lexicon, SequenceSpaceConfig(1, 2)))
        before = (policy.theta.copy(), policy.elp_w.copy(),
                  policy.elp_b.copy())
        never_flips = FixedOracle(lambda t: False)
        cfg = TrainConfig(epochs=3, learning_rate=5.0, seed=0,
                          alpha_reward=1.0, beta_reward=0.0,
                          require_consistency=False)
        _, trace = rl_train(policy, [("good", "y"), ("bad", "y")],
                            never_flips, cfg,
                            sentiment_of_label=lambda y: "positive")
        assert np.array_equal(policy.theta, before[0])
        assert np.array_equal(policy.elp_w, before[1])
        assert np.array_equal(policy.elp_b, before[2])
        assert all(r == -1.0 for r in trace.raw)

    def test_learns_the_flipping_token(self, toy_lexicon):
        # only runs of ":)" (token 2) flip this oracle
        flips = FixedOracle(lambda t: t.count(":)") >= 2,
                            no_flip_label="positive")
        policy = Policy(toy_lexicon, SequenceSpaceConfig(1, 2))
        cfg = TrainConfig(epochs=40, learning_rate=4.0, seed=1,
                          alpha_reward=1.0, beta_reward=0.0,
                          require_consistency=True)
        rl_train(policy, [("good day", "positive")] * 8, flips, cfg)
        top = rank_candidates(policy, "positive", 1,
                              AttackConfig(top_k=1,
                                           space=SequenceSpaceConfig(1, 2)))[0]
        assert set(top.prefix.tokens) == {2}
        assert set(top.suffix.tokens) == {2}

    def test_reward_trace_shapes(self, toy_policy):
        cfg = TrainConfig(epochs=2, seed=3, require_consistency=False)
        _, trace = rl_train(toy_policy, [("a", "y")] * 5,
                            FixedOracle(lambda t: False), cfg,
                            sentiment_of_label=lambda y: "neutral")
        assert len(trace.raw) == 10
        assert len(trace.smoothed) == 10
        assert len(trace.epoch_losses) == 2

    def test_reinforce_matches_exact_enumeration(self):
        """MC REINFORCE gradient vs central differences of the exactly
        enumerated expected reward, on a 2-token length-1 policy."""
        lex = load_lexicon("\n".join([
            '{"surface": "😀", "kind": "unicode_emoji", "sentiment": "positive"}',
            '{"surface": "😢", "kind": "unicode_emoji", "sentiment": "negative"}',
        ]), required_sentiments=("positive", "negative"))
        policy = Policy(lex, SequenceSpaceConfig(1, 1))
        rng = np.random.default_rng(17)
        policy.theta = rng.normal(0, 0.5, policy.theta.shape)
        policy.elp_w = 2.0 * np.eye(2) + rng.normal(0, 0.2, (2, 2))
        policy.elp_b = rng.normal(0, 0.2, 2)
        rewards = np.array([1.0, 0.2])
        c, r = policy.class_index("positive"), policy.role_index("prefix")

        def expected_reward():
            _, _, q = policy._forward(c, r, 0, 0, None)
            return float(q @ rewards)

        # independent oracle: finite differences of the enumerated E[R]
        eps = 1e-6

        def fd(get, set_):
            orig = get().copy()
            out = np.zeros_like(orig)
            it = np.nditer(orig, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                arr = orig.copy()
                arr[idx] = orig[idx] + eps
                set_(arr)
                up = expected_reward()
                arr[idx] = orig[idx] - eps
                set_(arr)
                dn = expected_reward()
                out[idx] = (up - dn) / (2 * eps)
            set_(orig)
            return out

        fd_theta = fd(lambda: policy.theta,
                      lambda a: setattr(policy, "theta", a))
        fd_w = fd(lambda: policy.elp_w, lambda a: setattr(policy, "elp_w", a))
        fd_b = fd(lambda: policy.elp_b, lambda a: setattr(policy, "elp_b", a))

        # REINFORCE estimate with the analytic per-action gradient
        p, _, q = policy._forward(c, r, 0, 0, None)
        per_action = []
        for a in range(2):
            g = policy._zero_grads()
            policy._backward_step(c, r, 0, 0, a, p, q, rewards[a], g)
            per_action.append(g)
        n = 200_000
        counts = np.random.default_rng(99).multinomial(n, q)
        mc = {key: sum(counts[a] * per_action[a][key] for a in range(2)) / n
              for key in ("theta", "W", "b")}

        for name, exact, est in (("theta", fd_theta, mc["theta"]),
                                 ("W", fd_w, mc["W"]), ("b", fd_b, mc["b"])):
            denom = max(np.max(np.abs(exact)), 1e-12)
            rel = np.max(np.abs(exact - est)) / denom
            assert rel < 1e-3, f"{name}: rel error {rel}"


class TestRankCandidates:
    def test_deterministic_argmax(self, toy_lexicon):
        policy = Policy(toy_lexicon, SequenceSpaceConfig(1, 2))
        policy.elp_b = np.array([50.0, 0.0, 0.0, 0.0])
        cfg = AttackConfig(top_k=1, space=SequenceSpaceConfig(1, 2),
                           require_consistency=False)
        top = rank_candidates(policy, "positive", 1, cfg)[0]
        assert top.prefix.tokens == (0,)
        assert top.suffix.tokens == (0,)

    def test_uniform_tie_break_matches_enumeration(self, toy_policy):
        cfg = AttackConfig(top_k=3, space=SequenceSpaceConfig(1, 1),
                           require_consistency=False)
        got = rank_candidates(toy_policy, "positive", 3, cfg)
        # independent enumeration: all 16 pairs tie, combined ids ascending
        pairs = sorted(itertools.product(range(4), repeat=2))[:3]
        assert [(c.prefix.tokens, c.suffix.tokens) for c in got] == \
            [((p,), (s,)) for p, s in pairs]

    def test_topk_lists_nest(self, lexicon, trained_policy):
        space = SequenceSpaceConfig(1, 4)
        lists = {k: rank_candidates(trained_policy, "positive", k,
                                    AttackConfig(top_k=k, space=space))
                 for k in (1, 3, 15, 30)}
        frozen = {k: [(c.prefix.tokens, c.suffix.tokens) for c in v]
                  for k, v in lists.items()}
        assert frozen[1] == frozen[30][:1]
        assert frozen[3] == frozen[30][:3]
        assert frozen[15] == frozen[30][:15]

    def test_scaling_logits_keeps_top1(self, toy_lexicon):
        policy = Policy(toy_lexicon, SequenceSpaceConfig(1, 2))
        rng = np.random.default_rng(4)
        policy.theta = rng.normal(0, 1.0, policy.theta.shape)
        cfg = AttackConfig(top_k=1, space=SequenceSpaceConfig(1, 2),
                           require_consistency=False)
        before = rank_candidates(policy, "negative", 1, cfg)[0]
        policy.theta = 3.0 * policy.theta
        after = rank_candidates(policy, "negative", 1, cfg)[0]
        assert (before.prefix.tokens, before.suffix.tokens) == \
            (after.prefix.tokens, after.suffix.tokens)

    def test_consistency_restricts_support(self, lexicon, trained_policy):
        cfg = AttackConfig(top_k=10, space=SequenceSpaceConfig(1, 4),
                           require_consistency=True)
        for c in rank_candidates(trained_policy, "negative", 10, cfg):
            for t in c.prefix.tokens + c.suffix.tokens:
                assert lexicon.token_sentiment(t) == "negative"

    def test_exhausted_space_returns_all(self, toy_lexicon):
        cfg = AttackConfig(top_k=30, space=SequenceSpaceConfig(1, 1),
                           require_consistency=False)
        policy = Policy(toy_lexicon, SequenceSpaceConfig(1, 1))
        got = rank_candidates(policy, "positive", 30, cfg)
        assert len(got) == 16  # 4 tokens per side

    def test_scores_are_joint_log_probs(self, toy_lexicon):
        policy = randomized(Policy(toy_lexicon, SequenceSpaceConfig(1, 2)),
                            seed=12)
        cfg = AttackConfig(top_k=5, space=SequenceSpaceConfig(1, 2),
                           require_consistency=False)
        for cand in rank_candidates(policy, "neutral", 5, cfg):
            lp = (policy.sequence_log_prob("neutral", "prefix", cand.prefix)
                  + policy.sequence_log_prob("neutral", "suffix", cand.suffix))
            assert cand.score == pytest.approx(lp, abs=1e-9)

    def test_random_candidates_respect_consistency(self, lexicon,
                                                   trained_policy, rng):
        cfg = AttackConfig(top_k=12, space=SequenceSpaceConfig(1, 4))
        cands = random_candidates(trained_policy, "positive", 12, cfg, rng)
        assert len(cands) == 12
        assert len({(c.prefix.tokens, c.suffix.tokens)
                    for c in cands}) == 12
        for c in cands:
            for t in c.prefix.tokens + c.suffix.tokens:
                assert lexicon.token_sentiment(t) == "positive"


class TestDistributionValidity:
    def test_every_step_distribution_valid(self, lexicon):
        policy = randomized(Policy(lexicon, SequenceSpaceConfig(1, 4)),
                            seed=2)
        for sentiment in ("positive", "negative", "neutral"):
            for role in ("prefix", "suffix"):
                for t in range(4):
                    q = policy.step_distribution(sentiment, role, t, None)
                    assert abs(q.sum() - 1.0) < 1e-9
                    assert (q >= 0).all()
                    masked = policy.step_distribution(
                        sentiment, role, t, 5,
                        allowed=policy.allowed_mask(sentiment))
                    assert abs(masked.sum() - 1.0) < 1e-9

    def test_entropy_bounds(self, toy_policy):
        q = toy_policy.step_distribution("positive", "prefix", 0, None)
        h = -(q * np.log(q)).sum()
        assert h == pytest.approx(math.log(4), abs=1e-9)


class TestCheckpoint:
    def test_round_trip_bit_exact(self, lexicon, tmp_path):
        policy = randomized(Policy(lexicon, SequenceSpaceConfig(1, 3)),
                            seed=6)
        policy.metadata["note"] = "round-trip"
        path = tmp_path / "p.json"
        save_policy(policy, path)
        loaded = load_policy(path, lexicon)
        assert np.array_equal(loaded.theta, policy.theta)
        assert np.array_equal(loaded.elp_w, policy.elp_w)
        assert np.array_equal(loaded.elp_b, policy.elp_b)
        assert loaded.metadata["note"] == "round-trip"
        assert loaded.space == policy.space

    def test_vocab_hash_mismatch_rejected(self, lexicon, toy_lexicon,
                                          tmp_path):
        policy = Policy(toy_lexicon, SequenceSpaceConfig(1, 2))
        path = tmp_path / "p.json"
        save_policy(policy, path)
        with pytest.raises(CheckpointError, match="vocabulary"):
            load_policy(path, lexicon)

    def test_unknown_version_rejected(self, toy_lexicon, tmp_path):
        policy = Policy(toy_lexicon, SequenceSpaceConfig(1, 2))
        path = tmp_path / "p.json"
        save_policy(policy, path)
        import json
        payload = json.loads(path.read_text())
        payload["version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(CheckpointError, match="version"):
            load_policy(path, toy_lexicon)

    def test_copy_policy_is_detached(self, toy_policy):
        dup = copy_policy(toy_policy)
        dup.theta[0, 0, 0, 0, 0] = 42.0
        assert toy_policy.theta[0, 0, 0, 0, 0] == 0.0
