import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbaiat.dsp import ComplexSpectrogram
from dbaiat.errors import ConfigurationError, ContractError, DimensionError
from dbaiat.model import (
    TINY_CONFIG,
    ModelConfig,
    aha_forward,
    atfat_forward,
    complex_decoder_forward,
    count_parameters,
    db_aiat_forward,
    dense_encoder_forward,
    fuse_encoders,
    identity_weights,
    init_weights,
    mask_decoder_forward,
    subpixel_upsample,
)
from dbaiat.numerics import Tensor, grad_check, grad_check_params, no_grad

FULL = ModelConfig()
FULL_WEIGHTS = init_weights(FULL)
ENC_TINY = ModelConfig(freq_bins=11, channels=4, heads=2, gru_hidden=3, dense_depth=2, dense_dilations=(1, 2))


def t(x, grad=False):
    return Tensor(np.asarray(x, dtype=np.float64), requires_grad=grad)


def weighted_sum(out, seed=7):
    proj = np.random.default_rng(seed).standard_normal(out.shape)
    return (out * proj).sum()


def compressed(rng, B, T, F=161, scale=1.0):
    return ComplexSpectrogram(
        rng.standard_normal((B, T, F)) * scale, rng.standard_normal((B, T, F)) * scale, compressed=True
    )


def params_under(weights, prefix):
    return {k: v for k, v in weights.items() if k.startswith(prefix)}


def perturb(weights, rng, scale=0.3):
    """Move zero/one-initialised parameters off their special values."""
    for v in weights.values():
        v.data[...] = v.data + rng.normal(0.0, scale, v.data.shape)


# ---------------------------------------------------------------- parameter oracle
def _conv_block(cout, cin, kt=1, kf=1):
    return cout * cin * kt * kf + cout + 2 * cout + cout


def _dense(C, depth):
    return sum(_conv_block(C, C * (i + 1), 2, 3) for i in range(depth))


def expected_count(cfg: ModelConfig) -> int:
    C, H, N, D = cfg.channels, cfg.gru_hidden, cfg.n_atfat, cfg.dense_depth
    transformer = 4 * (C * C + C) + 2 * C + 2 * (3 * H * C + 3 * H * H + 6 * H) + (2 * H * C + C) + 2 * C
    aiat = N * (2 * transformer + 2 + C + C * C + C) + N * (C + 1) + 1
    upsampler = _dense(C, D) + 2 * C * C * 3 + 2 * C + 3 * C

    def encoder(cin):
        return _conv_block(C, cin) + _dense(C, D) + _conv_block(C, C, 1, 3)

    mmb = encoder(1) + aiat + upsampler + 2 * (C * C + C) + C + 1
    crb = encoder(2) + aiat + 2 * (upsampler + C + 1)
    if cfg.branches == "mmb_only":
        return mmb
    if cfg.branches == "crb_only":
        return crb
    return mmb + crb + 2 * (2 * C * C + 2 * C)


class TestModelConfig:
    def test_defaults(self):
        assert (FULL.n_atfat, FULL.channels, FULL.freq_bins, FULL.heads) == (4, 64, 161, 4)
        assert FULL.halved_bins == 80
        assert FULL.dense_dilations == (1, 2, 4, 8)

    @pytest.mark.parametrize("F", [161, 21, 11, 4, 3])
    def test_halved_bins_formula(self, F):
        assert ModelConfig(freq_bins=F).halved_bins == (F - 3) // 2 + 1

    def test_heads_must_divide_channels(self):
        with pytest.raises(ConfigurationError):
            ModelConfig(channels=64, heads=5)

    def test_unknown_branch_mode(self):
        with pytest.raises(ConfigurationError):
            ModelConfig(branches="triple")

    def test_dilations_must_match_depth(self):
        with pytest.raises(ConfigurationError):
            ModelConfig(dense_depth=3)

    def test_dict_round_trip(self):
        cfg = ModelConfig(channels=32, gru_hidden=24, branches="mmb_only")
        assert ModelConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigurationError, match="bogus"):
            ModelConfig.from_dict({"bogus": 1})


class TestWeights:
    def test_adaptive_scalars(self):
        for trunk in ("mmb.aiat", "crb.aiat"):
            gammas = [k for k in FULL_WEIGHTS if k.startswith(trunk) and k.endswith("gamma")]
            assert gammas == [f"{trunk}.aha.gamma"]
            assert FULL_WEIGHTS[gammas[0]].data.tolist() == [0.0]
            for n in range(4):
                assert FULL_WEIGHTS[f"{trunk}.atfat{n}.alpha"].data.tolist() == [1.0]
                assert FULL_WEIGHTS[f"{trunk}.atfat{n}.beta"].data.tolist() == [1.0]

    def test_seeded(self):
        a, b = init_weights(TINY_CONFIG, seed=5), init_weights(TINY_CONFIG, seed=5)
        assert list(a) == list(b)
        assert all(np.array_equal(a[k].data, b[k].data) for k in a)
        c = init_weights(TINY_CONFIG, seed=6)
        assert not np.array_equal(a["mmb.encoder.conv_in.conv.weight"].data, c["mmb.encoder.conv_in.conv.weight"].data)

    def test_biases_zero(self):
        assert all(not v.data.any() for k, v in FULL_WEIGHTS.items() if k.endswith(("bias", "b_ih", "b_hh")))

    def test_recurrent_blocks_orthogonal(self):
        w_hh = FULL_WEIGHTS["mmb.aiat.atfat0.time.gru.fwd.w_hh"].data
        H = FULL.gru_hidden
        for g in range(3):
            block = w_hh[g * H:(g + 1) * H]
            np.testing.assert_allclose(block @ block.T, np.eye(H), atol=1e-12)

    @pytest.mark.parametrize("mode", ["dual", "mmb_only", "crb_only"])
    def test_count_matches_closed_form(self, mode):
        for cfg in (ModelConfig(branches=mode), ModelConfig(branches=mode, channels=16, gru_hidden=8, n_atfat=2)):
            assert count_parameters(init_weights(cfg)) == expected_count(cfg)

    @pytest.mark.parametrize("mode,target", [("dual", 2.81e6), ("mmb_only", 0.90e6), ("crb_only", 1.17e6)])
    def test_count_near_reported_size(self, mode, target):
        n = count_parameters(init_weights(ModelConfig(branches=mode)))
        assert abs(n - target) <= 0.25 * target

    def test_single_scalar(self):
        assert count_parameters({"gamma": t([0.0])}) == 1

    def test_identity_needs_masking_branch(self):
        with pytest.raises(ConfigurationError):
            identity_weights(ModelConfig(branches="crb_only"))


class TestDenseEncoder:
    def test_magnitude_shape(self):
        x = t(np.random.default_rng(0).random((1, 8, 161, 1)))
        assert dense_encoder_forward(x, FULL_WEIGHTS.scope("mmb.encoder"), FULL).shape == (1, 8, 80, 64)

    def test_complex_shape(self):
        x = t(np.random.default_rng(1).standard_normal((2, 5, 161, 2)))
        assert dense_encoder_forward(x, FULL_WEIGHTS.scope("crb.encoder"), FULL).shape == (2, 5, 80, 64)

    def test_wrong_input_channels(self):
        with pytest.raises(ConfigurationError):
            dense_encoder_forward(t(np.zeros((1, 2, 161, 2))), FULL_WEIGHTS.scope("mmb.encoder"), FULL)
        with pytest.raises(ConfigurationError):
            dense_encoder_forward(t(np.zeros((1, 2, 161, 3))), FULL_WEIGHTS.scope("crb.encoder"), FULL)

    def test_causal_in_time(self):
        rng = np.random.default_rng(2)
        w = init_weights(TINY_CONFIG, seed=1)
        x = rng.standard_normal((1, 12, 21, 1))
        y = rng.standard_normal((1, 12, 21, 1))
        y[:, :7] = x[:, :7]
        scope = w.scope("mmb.encoder")
        a = dense_encoder_forward(t(x), scope, TINY_CONFIG).data
        b = dense_encoder_forward(t(y), scope, TINY_CONFIG).data
        np.testing.assert_array_equal(a[:, :7], b[:, :7])
        assert not np.allclose(a[:, 7:], b[:, 7:])

    def test_gradients_tiny(self):
        rng = np.random.default_rng(3)
        w = init_weights(ENC_TINY, seed=2)
        perturb(w, rng)
        scope = w.scope("crb.encoder")
        x = rng.standard_normal((1, 5, 11, 2))
        assert dense_encoder_forward(t(x), scope, ENC_TINY).shape == (1, 5, 5, 4)
        err = grad_check(lambda v: weighted_sum(dense_encoder_forward(v, scope, ENC_TINY)), x, epsilon=1e-5)
        assert err < 1e-4
        errs = grad_check_params(
            lambda: weighted_sum(dense_encoder_forward(t(x), scope, ENC_TINY)), params_under(w, "crb.encoder")
        )
        assert max(errs.values()) < 1e-4


class TestFusion:
    def test_shape(self):
        rng = np.random.default_rng(4)
        a, b = t(rng.standard_normal((1, 4, 80, 64))), t(rng.standard_normal((1, 4, 80, 64)))
        assert fuse_encoders(a, b, FULL_WEIGHTS.scope("mmb.fuse")).shape == (1, 4, 80, 64)

    def test_zero_inputs(self):
        z = t(np.zeros((1, 4, 80, 64)))
        assert not fuse_encoders(z, z, FULL_WEIGHTS.scope("crb.fuse")).data.any()

    def test_selector_reproduces_first_input(self):
        w = init_weights(FULL).copy()
        w["mmb.fuse.conv.weight"].data[...] = 0.0
        w["mmb.fuse.conv.weight"].data[:, :64, 0, 0] = np.eye(64)
        w["mmb.fuse.act.slope"].data[...] = 1.0
        rng = np.random.default_rng(5)
        a, b = rng.standard_normal((1, 4, 80, 64)), rng.standard_normal((1, 4, 80, 64))
        np.testing.assert_array_equal(fuse_encoders(t(a), t(b), w.scope("mmb.fuse")).data, a)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            fuse_encoders(t(np.zeros((1, 4, 80, 64))), t(np.zeros((1, 5, 80, 64))), FULL_WEIGHTS.scope("mmb.fuse"))


class TestAtfat:
    def test_shape_preserved(self):
        x = t(np.random.default_rng(6).standard_normal((1, 6, 80, 64)))
        assert atfat_forward(x, FULL_WEIGHTS.scope("mmb.aiat.atfat0"), FULL).shape == (1, 6, 80, 64)

    def test_zero_gates_leave_bias(self):
        w = init_weights(TINY_CONFIG).copy()
        p = w.scope("mmb.aiat.atfat0")
        p["alpha"].data[...] = 0.0
        p["beta"].data[...] = 0.0
        p["post.conv.bias"].data[...] = np.arange(8.0)
        x = t(np.random.default_rng(7).standard_normal((2, 3, 10, 8)))
        out = atfat_forward(x, p, TINY_CONFIG).data
        np.testing.assert_array_equal(out, np.broadcast_to(np.arange(8.0), out.shape))

    def test_batch_equivariance(self):
        p = init_weights(TINY_CONFIG).scope("crb.aiat.atfat1")
        x = np.random.default_rng(8).standard_normal((3, 4, 10, 8))
        perm = [2, 0, 1]
        a = atfat_forward(t(x), p, TINY_CONFIG).data
        b = atfat_forward(t(x[perm]), p, TINY_CONFIG).data
        np.testing.assert_allclose(b, a[perm], atol=1e-12)

    def test_time_branch_keeps_bins_separate(self):
        w = init_weights(TINY_CONFIG).copy()
        p = w.scope("mmb.aiat.atfat0")
        p["beta"].data[...] = 0.0
        rng = np.random.default_rng(9)
        x = rng.standard_normal((1, 5, 10, 8))
        y = x.copy()
        y[:, :, 4] = rng.standard_normal((1, 5, 8))
        a, b = atfat_forward(t(x), p, TINY_CONFIG).data, atfat_forward(t(y), p, TINY_CONFIG).data
        changed = np.abs(a - b).max(axis=(0, 1, 3)) > 0
        assert changed.tolist() == [f == 4 for f in range(10)]

    def test_frequency_branch_keeps_frames_separate(self):
        w = init_weights(TINY_CONFIG).copy()
        p = w.scope("mmb.aiat.atfat0")
        p["alpha"].data[...] = 0.0
        rng = np.random.default_rng(10)
        x = rng.standard_normal((1, 5, 10, 8))
        y = x.copy()
        y[:, 2] = rng.standard_normal((1, 10, 8))
        a, b = atfat_forward(t(x), p, TINY_CONFIG).data, atfat_forward(t(y), p, TINY_CONFIG).data
        changed = np.abs(a - b).max(axis=(0, 2, 3)) > 0
        assert changed.tolist() == [i == 2 for i in range(5)]


class TestAha:
    def _levels(self, rng, n=4, shape=(2, 3, 10, 8)):
        return [t(rng.standard_normal(shape)) for _ in range(n)]

    def _weights(self, seed=0):
        cfg = ModelConfig(n_atfat=4, channels=8, freq_bins=21, heads=2, gru_hidden=4)
        return init_weights(cfg, seed=seed).copy()

    def test_equal_projections_give_uniform_weights(self):
        w = self._weights()
        for n in range(4):
            w[f"mmb.aiat.aha.level{n}.weight"].data[...] = 0.0
        _, weights = aha_forward(self._levels(np.random.default_rng(11)), w.scope("mmb.aiat"))
        np.testing.assert_array_equal(weights.data, np.full((2, 4), 0.25))

    def test_zero_gamma_is_identity(self):
        feats = self._levels(np.random.default_rng(12))
        out, _ = aha_forward(feats, self._weights().scope("mmb.aiat"))
        np.testing.assert_array_equal(out.data, feats[-1].data)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(13)
        w = self._weights(seed=3)
        perturb(w, rng, scale=1.0)
        p = w.scope("crb.aiat")
        feats = self._levels(rng)
        out, weights = aha_forward(feats, p)
        B = feats[0].shape[0]
        for b in range(B):
            logits = np.empty(4)
            for n in range(4):
                pooled = feats[n].data[b].mean(axis=(0, 1))
                kernel = p[f"aha.level{n}.weight"].data[0, :, 0, 0]
                logits[n] = sum(pooled[c] * kernel[c] for c in range(8)) + p[f"aha.level{n}.bias"].data[0]
            e = np.exp(logits - logits.max())
            soft = e / e.sum()
            context = sum(soft[n] * feats[n].data[b] for n in range(4))
            expected = feats[-1].data[b] + p["aha.gamma"].data[0] * context
            np.testing.assert_allclose(weights.data[b], soft, atol=1e-12)
            np.testing.assert_allclose(out.data[b], expected, atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0.1, 30.0))
    def test_weights_are_a_distribution(self, seed, scale):
        rng = np.random.default_rng(seed)
        w = self._weights()
        for n in range(4):
            w[f"mmb.aiat.aha.level{n}.weight"].data[...] = rng.standard_normal((1, 8, 1, 1)) * scale
        _, weights = aha_forward(self._levels(rng), w.scope("mmb.aiat"))
        assert np.all(weights.data >= 0)
        np.testing.assert_allclose(weights.data.sum(axis=-1), 1.0, rtol=0, atol=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ContractError):
            aha_forward([], FULL_WEIGHTS.scope("mmb.aiat"))


class TestDecoders:
    def test_mask_shape_and_range(self):
        x = t(np.random.default_rng(14).standard_normal((1, 6, 80, 64)))
        m = mask_decoder_forward(x, FULL_WEIGHTS.scope("mmb.mask_decoder"), FULL).data
        assert m.shape == (1, 6, 161, 1)
        assert np.all((m > 0) & (m < 1))

    def test_mask_zero_input(self):
        m = mask_decoder_forward(t(np.zeros((1, 6, 80, 64))), FULL_WEIGHTS.scope("mmb.mask_decoder"), FULL)
        np.testing.assert_array_equal(m.data, 0.5)

    def test_mask_gradients_tiny(self):
        rng = np.random.default_rng(15)
        w = init_weights(TINY_CONFIG, seed=4)
        perturb(w, rng)
        p = w.scope("mmb.mask_decoder")
        x = rng.standard_normal((1, 3, 10, 8))
        err = grad_check(lambda v: weighted_sum(mask_decoder_forward(v, p, TINY_CONFIG)), x, epsilon=1e-5)
        assert err < 1e-4
        errs = grad_check_params(
            lambda: weighted_sum(mask_decoder_forward(t(x), p, TINY_CONFIG)), params_under(w, "mmb.mask_decoder")
        )
        assert max(errs.values()) < 1e-4

    def test_subpixel_interleave_matches_loop(self):
        rng = np.random.default_rng(16)
        w = init_weights(TINY_CONFIG, seed=5)
        perturb(w, rng)
        p = w.scope("crb.real_decoder")
        x = rng.standard_normal((2, 3, 10, 8))
        out = subpixel_upsample(t(x), p, TINY_CONFIG).data
        # loop oracle: explicit correlation, interleave, LN, PReLU, zero bin
        k, bias = p["subpixel.conv.weight"].data, p["subpixel.conv.bias"].data
        xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (0, 0)))
        conv = np.zeros((2, 3, 10, 16))
        for f in range(10):
            for j in range(3):
                conv[:, :, f] += xp[:, :, f + j] @ k[:, :, 0, j].T
        conv += bias
        shuffled = np.empty((2, 3, 20, 8))
        for f in range(10):
            for r in range(2):
                shuffled[:, :, 2 * f + r] = conv[:, :, f, r * 8:(r + 1) * 8]
        mu = shuffled.mean(-1, keepdims=True)
        var = shuffled.var(-1, keepdims=True)
        normed = (shuffled - mu) / np.sqrt(var + 1e-5) * p["subpixel.norm.gain"].data + p["subpixel.norm.bias"].data
        act = np.where(normed > 0, normed, p["subpixel.act.slope"].data * normed)
        assert out.shape == (2, 3, 21, 8)
        np.testing.assert_allclose(out[:, :, :20], act, atol=1e-12)
        np.testing.assert_array_equal(out[:, :, 20], 0.0)

    def test_complex_shape(self):
        x = t(np.random.default_rng(17).standard_normal((1, 6, 80, 64)))
        assert complex_decoder_forward(x, FULL_WEIGHTS.scope("crb.real_decoder"), FULL).shape == (1, 6, 161, 1)

    def test_complex_zero_output_layer(self):
        w = init_weights(TINY_CONFIG).copy()
        w["crb.imag_decoder.out.weight"].data[...] = 0.0
        x = t(np.random.default_rng(18).standard_normal((1, 4, 10, 8)))
        assert not complex_decoder_forward(x, w.scope("crb.imag_decoder"), TINY_CONFIG).data.any()

    def test_complex_output_can_be_negative(self):
        w = init_weights(TINY_CONFIG).copy()
        w["crb.real_decoder.out.weight"].data[...] = 0.0
        w["crb.real_decoder.out.bias"].data[...] = -2.5
        x = t(np.random.default_rng(19).standard_normal((1, 4, 10, 8)))
        np.testing.assert_array_equal(complex_decoder_forward(x, w.scope("crb.real_decoder"), TINY_CONFIG).data, -2.5)


class TestNetwork:
    def test_identity_weights_pass_input_through(self):
        rng = np.random.default_rng(20)
        spec = compressed(rng, 1, 9)
        with no_grad():
            out, branches = db_aiat_forward(spec, identity_weights(FULL), FULL)
        assert np.all(branches.mask.data == 1.0)
        np.testing.assert_array_equal(out.real.data, spec.real)
        np.testing.assert_array_equal(out.imag.data, spec.imag)

    @pytest.mark.parametrize("T", [1, 7])
    def test_full_size_shapes(self, T):
        spec = compressed(np.random.default_rng(T), 1, T)
        with no_grad():
            out, _ = db_aiat_forward(spec, FULL_WEIGHTS, FULL)
        assert out.compressed and out.shape == (1, T, 161)
        assert out.ri.shape == (1, T, 161, 2)

    def test_unbatched_input_keeps_shape(self):
        rng = np.random.default_rng(21)
        spec = ComplexSpectrogram(rng.standard_normal((5, 21)), rng.standard_normal((5, 21)), compressed=True)
        out, branches = db_aiat_forward(spec, init_weights(TINY_CONFIG), TINY_CONFIG)
        assert out.shape == (5, 21) and branches.mask.shape == (1, 5, 21, 1)

    def test_merged_is_coarse_plus_residual(self):
        rng = np.random.default_rng(22)
        w = init_weights(TINY_CONFIG, seed=7)
        perturb(w, rng)
        spec = compressed(rng, 2, 4, F=21)
        out, br = db_aiat_forward(spec, w, TINY_CONFIG)
        m = br.mask.data[..., 0]
        for b in range(2):
            for i in range(4):
                for f in range(21):
                    mag = np.hypot(spec.real[b, i, f], spec.imag[b, i, f])
                    theta = np.arctan2(spec.imag[b, i, f], spec.real[b, i, f])
                    re = m[b, i, f] * mag * np.cos(theta) + br.crb_real.data[b, i, f, 0]
                    im = m[b, i, f] * mag * np.sin(theta) + br.crb_imag.data[b, i, f, 0]
                    assert abs(out.real.data[b, i, f] - re) < 1e-12
                    assert abs(out.imag.data[b, i, f] - im) < 1e-12
        np.testing.assert_array_equal(br.merged_real.data, br.coarse_real.data + br.crb_real.data)
        np.testing.assert_allclose(br.merged_real.data - br.crb_real.data, br.coarse_real.data, atol=1e-12)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(1e-3, 1e3))
    def test_mask_strictly_inside_unit_interval(self, seed, scale):
        rng = np.random.default_rng(seed)
        with no_grad():
            _, br = db_aiat_forward(compressed(rng, 1, 3, F=21, scale=scale), init_weights(TINY_CONFIG), TINY_CONFIG)
        assert np.all((br.mask.data > 0) & (br.mask.data < 1))

    def test_aha_weights_reported(self):
        _, br = db_aiat_forward(compressed(np.random.default_rng(23), 2, 3, F=21), init_weights(TINY_CONFIG), TINY_CONFIG)
        for key in ("mmb", "crb"):
            assert br.aha_weights[key].shape == (2, 2)
            np.testing.assert_allclose(br.aha_weights[key].sum(-1), 1.0, atol=1e-12)

    def test_mmb_only_keeps_noisy_phase(self):
        cfg = ModelConfig(n_atfat=2, channels=8, freq_bins=21, heads=2, gru_hidden=4, branches="mmb_only")
        spec = compressed(np.random.default_rng(24), 1, 6, F=21)
        out, br = db_aiat_forward(spec, init_weights(cfg), cfg)
        assert br.crb_real is None
        phase_in = np.arctan2(spec.imag, spec.real)
        phase_out = np.arctan2(out.imag.data, out.real.data)
        np.testing.assert_allclose(phase_out, phase_in, atol=1e-12)

    def test_crb_only_regresses_full_spectrum(self):
        cfg = ModelConfig(n_atfat=2, channels=8, freq_bins=21, heads=2, gru_hidden=4, branches="crb_only")
        out, br = db_aiat_forward(compressed(np.random.default_rng(25), 1, 6, F=21), init_weights(cfg), cfg)
        assert br.mask is None
        np.testing.assert_array_equal(out.real.data, br.crb_real.data[..., 0])
        np.testing.assert_array_equal(out.imag.data, br.crb_imag.data[..., 0])

    def test_uncompressed_rejected(self):
        spec = ComplexSpectrogram(np.zeros((1, 2, 21)), np.zeros((1, 2, 21)))
        with pytest.raises(ContractError):
            db_aiat_forward(spec, init_weights(TINY_CONFIG), TINY_CONFIG)

    def test_wrong_bin_count_rejected(self):
        spec = ComplexSpectrogram(np.zeros((1, 2, 20)), np.zeros((1, 2, 20)), compressed=True)
        with pytest.raises(DimensionError):
            db_aiat_forward(spec, init_weights(TINY_CONFIG), TINY_CONFIG)

    def test_gradient_reaches_every_parameter(self):
        rng = np.random.default_rng(26)
        w = init_weights(TINY_CONFIG, seed=8)
        perturb(w, rng)
        out, _ = db_aiat_forward(compressed(rng, 1, 3, F=21), w, TINY_CONFIG)
        grads = (weighted_sum(out.real) + weighted_sum(out.imag, seed=8)).backward()
        missing = [k for k, v in w.items() if v not in grads or not np.any(grads[v])]
        assert missing == []
