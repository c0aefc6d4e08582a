import wave

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dbaiat.dsp import (
    ComplexSpectrogram,
    StftConfig,
    Waveform,
    compress,
    decompress,
    istft,
    mix_at_snr,
    read_wav,
    snr_db,
    stft,
    write_wav,
)
from dbaiat.errors import ContractError, FormatError, InputError

CFG = StftConfig()


def tone(freq, seconds=1.0, amp=1.0):
    n = np.arange(int(16000 * seconds))
    return Waveform(amp * np.sin(2 * np.pi * freq * n / 16000))


class TestStftConfig:
    def test_default_framing_320_160(self):
        assert (CFG.n_fft, CFG.win_length, CFG.hop, CFG.n_bins) == (320, 320, 160, 161)

    def test_hann_cola_at_half_overlap(self):
        w = CFG.window_array()
        np.testing.assert_allclose(w[:160] + w[160:], 1.0, atol=1e-15)


class TestStft:
    def test_zero_waveform(self):
        spec = stft(Waveform(np.zeros(48000)))
        assert spec.shape == (301, 161)
        assert not spec.real.any() and not spec.imag.any()

    def test_three_second_frame_count(self):
        assert stft(Waveform(np.random.default_rng(0).standard_normal(48000) * 0.1)).shape[0] == 301
        assert CFG.n_frames(48000) == 301

    def test_one_khz_tone_peaks_at_bin_20(self):
        spec = stft(tone(1000.0))
        assert np.all(spec.magnitude().argmax(axis=1) == 20)

    def test_reflect_padding_available(self):
        cfg = StftConfig(pad_mode="reflect")
        x = np.random.default_rng(10).uniform(-1, 1, 3000)
        y = istft(stft(Waveform(x), cfg), length=x.size).samples
        assert np.max(np.abs(y - x)) < 1e-6

    def test_short_input_single_frame(self):
        assert stft(Waveform(np.ones(10))).shape == (CFG.n_frames(10), 161) == (2, 161)

    def test_matches_direct_dft_oracle(self):
        x = np.random.default_rng(1).standard_normal(1600)
        spec = stft(Waveform(x))
        padded = np.pad(x, 160)
        w = CFG.window_array()
        k = np.arange(161)[:, None]
        n = np.arange(320)[None, :]
        basis = np.exp(-2j * np.pi * k * n / 320)
        for t in (0, 3, spec.shape[0] - 1):
            frame = padded[t * 160: t * 160 + 320] * w
            ref = basis @ frame
            np.testing.assert_allclose(spec.real[t], ref.real, atol=1e-10)
            np.testing.assert_allclose(spec.imag[t], ref.imag, atol=1e-10)

    def test_linear(self):
        rng = np.random.default_rng(2)
        a, b = rng.standard_normal(4000), rng.standard_normal(4000)
        s = stft(Waveform(2 * a - 3 * b)).real
        np.testing.assert_allclose(s, 2 * stft(Waveform(a)).real - 3 * stft(Waveform(b)).real, atol=1e-10)

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            stft(Waveform(np.zeros(0)))

    def test_parseval_with_window_correction(self):
        x = np.random.default_rng(3).standard_normal(16000)
        spec = stft(Waveform(x))
        mag2 = spec.magnitude() ** 2
        two_sided = mag2.sum() + mag2[:, 1:-1].sum()
        w = CFG.window_array()
        energy = two_sided / (CFG.n_fft * np.sum(w ** 2) / CFG.hop)
        assert abs(energy / np.sum(x ** 2) - 1.0) < 0.01


class TestIstft:
    @pytest.mark.parametrize("seed", range(5))
    def test_round_trip(self, seed):
        x = np.random.default_rng(seed).uniform(-1, 1, 16000)
        y = istft(stft(Waveform(x)), length=x.size).samples
        assert np.max(np.abs(y - x)) < 1e-6

    def test_round_trip_odd_length(self):
        x = np.random.default_rng(9).uniform(-1, 1, 16077)
        y = istft(stft(Waveform(x)), length=x.size).samples
        assert y.size == x.size
        assert np.max(np.abs(y - x)) < 1e-6

    def test_zero_spectrogram(self):
        spec = ComplexSpectrogram(np.zeros((11, 161)), np.zeros((11, 161)))
        assert not istft(spec, 1600).samples.any()

    def test_linear(self):
        rng = np.random.default_rng(4)
        s1 = ComplexSpectrogram(rng.standard_normal((9, 161)), rng.standard_normal((9, 161)))
        s2 = ComplexSpectrogram(rng.standard_normal((9, 161)), rng.standard_normal((9, 161)))
        mix = ComplexSpectrogram(0.7 * s1.real - 2 * s2.real, 0.7 * s1.imag - 2 * s2.imag)
        lhs = istft(mix, 1440).samples
        rhs = 0.7 * istft(s1, 1440).samples - 2 * istft(s2, 1440).samples
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_compressed_rejected(self):
        spec = compress(stft(tone(440.0, 0.1)))
        with pytest.raises(ContractError):
            istft(spec)


class TestCompression:
    def test_real_bin(self):
        out = compress(ComplexSpectrogram(np.array([[4.0]]), np.array([[0.0]])), 0.5)
        assert (out.real[0, 0], out.imag[0, 0], out.compressed) == (2.0, 0.0, True)

    def test_zero_bin(self):
        out = compress(ComplexSpectrogram(np.zeros((1, 3)), np.zeros((1, 3))))
        assert not out.real.any() and not out.imag.any()

    def test_unit_exponent_is_identity(self):
        rng = np.random.default_rng(5)
        spec = ComplexSpectrogram(rng.standard_normal((3, 5)), rng.standard_normal((3, 5)))
        out = compress(spec, 1.0)
        np.testing.assert_array_equal(out.real, spec.real)
        np.testing.assert_array_equal(out.imag, spec.imag)

    def test_decompress_real_bin(self):
        out = decompress(ComplexSpectrogram(np.array([[2.0]]), np.array([[0.0]]), compressed=True), 0.5)
        assert (out.real[0, 0], out.imag[0, 0], out.compressed) == (4.0, 0.0, False)

    def test_unit_magnitude_unchanged(self):
        theta = np.linspace(-3, 3, 7)[None]
        spec = ComplexSpectrogram(np.cos(theta), np.sin(theta), compressed=True)
        out = decompress(spec)
        np.testing.assert_allclose(out.real, spec.real, atol=1e-15)
        np.testing.assert_allclose(out.imag, spec.imag, atol=1e-15)

    def test_double_compression_rejected(self):
        spec = compress(ComplexSpectrogram(np.ones((1, 2)), np.ones((1, 2))))
        with pytest.raises(ContractError):
            compress(spec)
        with pytest.raises(ContractError):
            decompress(decompress(spec))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0.1, 1.0))
    def test_round_trip(self, seed, c):
        rng = np.random.default_rng(seed)
        spec = ComplexSpectrogram(rng.standard_normal((4, 6)) * 10, rng.standard_normal((4, 6)) * 10)
        back = decompress(compress(spec, c), c)
        mag = spec.magnitude()
        assert np.max(np.abs(back.magnitude() - mag) / mag) < 1e-10
        np.testing.assert_allclose(compress(spec, c).phase(), spec.phase(), rtol=0, atol=1e-14)


class TestMixing:
    def test_equal_power_zero_db(self):
        rng = np.random.default_rng(6)
        c = rng.standard_normal(1000)
        n = rng.standard_normal(1000)
        n *= np.sqrt(np.mean(c ** 2) / np.mean(n ** 2))
        mixed = mix_at_snr(Waveform(c), Waveform(n), 0.0).samples
        np.testing.assert_allclose(mixed - c, n, atol=1e-14)

    def test_equal_power_twenty_db_gain(self):
        rng = np.random.default_rng(7)
        c = rng.standard_normal(1000)
        n = rng.standard_normal(1000)
        n *= np.sqrt(np.mean(c ** 2) / np.mean(n ** 2))
        mixed = mix_at_snr(Waveform(c), Waveform(n), 20.0).samples
        np.testing.assert_allclose(mixed - c, 0.1 * n, atol=1e-14)

    @pytest.mark.parametrize("target", [0.0, 5.0, 10.0, 15.0, -3.5])
    def test_measured_snr(self, target):
        rng = np.random.default_rng(8)
        c, n = rng.standard_normal(1600), rng.standard_normal(2000) * 3
        mixed = mix_at_snr(Waveform(c), Waveform(n), target).samples
        assert abs(snr_db(c, mixed - c) - target) < 1e-9

    def test_silent_noise_rejected(self):
        with pytest.raises(InputError):
            mix_at_snr(tone(440.0, 0.1), Waveform(np.zeros(1600)), 5.0)

    def test_silent_clean_rejected(self):
        with pytest.raises(InputError):
            mix_at_snr(Waveform(np.zeros(1600)), tone(440.0, 0.1), 5.0)

    def test_short_noise_rejected(self):
        with pytest.raises(InputError):
            mix_at_snr(tone(440.0, 0.1), tone(300.0, 0.05), 5.0)


class TestWav:
    def _write_raw(self, path, data, channels=1, width=2, rate=16000):
        with wave.open(str(path), "wb") as fh:
            fh.setnchannels(channels)
            fh.setsampwidth(width)
            fh.setframerate(rate)
            fh.writeframes(data)

    def test_scaling_convention(self, tmp_path):
        p = tmp_path / "a.wav"
        self._write_raw(p, np.array([16384, -32768, 0], dtype="<i2").tobytes())
        np.testing.assert_array_equal(read_wav(p).samples, [0.5, -1.0, 0.0])

    def test_round_trip_bit_exact(self, tmp_path):
        src, dst = tmp_path / "src.wav", tmp_path / "dst.wav"
        payload = np.random.default_rng(9).integers(-32768, 32768, 5000).astype("<i2").tobytes()
        self._write_raw(src, payload)
        write_wav(dst, read_wav(src))
        with wave.open(str(dst), "rb") as fh:
            assert fh.readframes(fh.getnframes()) == payload

    def test_stereo_rejected(self, tmp_path):
        p = tmp_path / "s.wav"
        self._write_raw(p, np.zeros(20, dtype="<i2").tobytes(), channels=2)
        with pytest.raises(FormatError, match="channel"):
            read_wav(p)

    def test_sample_rate_rejected(self, tmp_path):
        p = tmp_path / "r.wav"
        self._write_raw(p, np.zeros(20, dtype="<i2").tobytes(), rate=8000)
        with pytest.raises(FormatError, match="sample rate"):
            read_wav(p)

    def test_bit_depth_rejected(self, tmp_path):
        p = tmp_path / "b.wav"
        self._write_raw(p, np.zeros(20, dtype="u1").tobytes(), width=1)
        with pytest.raises(FormatError, match="bit depth"):
            read_wav(p)

    def test_garbage_rejected(self, tmp_path):
        p = tmp_path / "g.wav"
        p.write_bytes(b"not a wav file at all")
        with pytest.raises(FormatError):
            read_wav(p)
