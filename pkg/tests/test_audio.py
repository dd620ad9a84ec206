import os
import struct
import time

import numpy as np
import pytest
import soundfile as sf

from audio import AudioClip, add_noise, generate_synthetic_corpus, mix_at_snr, read_wav, write_corpus, write_wav
from audio.clip import compose
from audio.mixing import PEAK_TARGET, measured_snr
from utils import load_corpus, load_manifest


def _clip(rng, length=800):
    return AudioClip(rng.standard_normal(length))


# =================================================================
#  MIXING
# =================================================================
@pytest.mark.parametrize("snr", [-5, 0, 3, 5, 10])
def test_two_source_snr_is_exact(rng, snr):
    record = mix_at_snr(_clip(rng), _clip(rng, 300), snr)
    s1, s2 = (s.samples for s in record.sources)
    assert abs(measured_snr(s1, s2) - snr) < 1e-6
    assert np.array_equal(record.mixture.samples, compose([s1, s2]))
    assert np.max(np.abs(record.mixture.samples)) == pytest.approx(PEAK_TARGET, abs=1e-12)


@pytest.mark.parametrize("kind", ["gaussian", "file"])
@pytest.mark.parametrize("snr", [-5, 0, 3, 5, 10])
def test_noise_snr_is_exact(short_records, noise_dir, kind, snr):
    clean = short_records[0]
    noisy = add_noise(clean, kind, snr, noise_source=noise_dir, seed=4)
    sources = [s.samples for s in noisy.sources]
    assert abs(measured_snr(compose(sources), noisy.noise.samples) - snr) < 1e-6
    assert np.array_equal(noisy.mixture.samples, compose(sources, noisy.noise.samples))
    assert noisy.noise_label == f"{kind}@{snr:g}dB"


def test_zero_db_gaussian_noise_matches_mixture_power(short_records):
    noisy = add_noise(short_records[1], "gaussian", 0.0, seed=1, normalize=False)
    clean_power = np.mean(short_records[1].mixture.samples ** 2)
    assert noisy.noise.power == pytest.approx(clean_power, rel=1e-6)


def test_noise_is_deterministic(short_records, noise_dir):
    for kind in ("gaussian", "file"):
        a = add_noise(short_records[2], kind, 3.0, noise_source=noise_dir, seed=9)
        b = add_noise(short_records[2], kind, 3.0, noise_source=noise_dir, seed=9)
        assert np.array_equal(a.mixture.samples, b.mixture.samples)


def test_noise_errors(short_records, tmp_path):
    with pytest.raises(ValueError):
        add_noise(short_records[0], "pink", 0.0)
    with pytest.raises(ValueError):
        add_noise(short_records[0], "file", 0.0, noise_source=str(tmp_path))
    with pytest.raises(FileNotFoundError):
        add_noise(short_records[0], "file", 0.0, noise_source=str(tmp_path / "missing"))
    noisy = add_noise(short_records[0], "gaussian", 5.0)
    with pytest.raises(ValueError):
        add_noise(noisy, "gaussian", 5.0)


def test_zero_power_is_rejected(rng):
    with pytest.raises(ValueError):
        mix_at_snr(AudioClip(np.zeros(100)), _clip(rng), 0.0)
    with pytest.raises(ValueError):
        mix_at_snr(_clip(rng), AudioClip(np.zeros(100)), 0.0)


def test_wrong_rate_is_rejected(rng):
    with pytest.raises(ValueError):
        mix_at_snr(AudioClip(rng.standard_normal(50), 16000), _clip(rng), 0.0)


# =================================================================
#  WAV
# =================================================================
def test_wav_round_trip_error_bound(tmp_path, rng):
    samples = rng.uniform(-1.0, 1.0, 4000)
    samples[:2] = [1.0, -1.0]
    path = str(tmp_path / "x.wav")
    write_wav(path, AudioClip(samples))
    back = read_wav(path).samples
    assert back.shape == samples.shape
    assert np.max(np.abs(back - samples)) <= 2.0 ** -15


def test_out_of_range_samples_are_clamped_and_reported(tmp_path, capsys):
    path = str(tmp_path / "loud.wav")
    write_wav(path, AudioClip(np.array([0.5, 1.5, -2.0, -1.0])))
    assert "2 sample(s) clamped" in capsys.readouterr().out
    np.testing.assert_array_equal(read_wav(path).samples, [0.5, 32767 / 32768, -1.0, -1.0])

    write_wav(path, AudioClip(np.array([0.25, -0.25])))
    assert capsys.readouterr().out == ""


def test_wav_header(tmp_path, rng):
    path = str(tmp_path / "h.wav")
    write_wav(path, AudioClip(rng.uniform(-0.5, 0.5, 321)))
    data = open(path, "rb").read()
    assert data[:4] == b"RIFF" and data[8:12] == b"WAVE"
    assert struct.unpack("<I", data[4:8])[0] == len(data) - 8

    chunks, pos = {}, 12
    while pos + 8 <= len(data):
        name, size = data[pos:pos + 4], struct.unpack("<I", data[pos + 4:pos + 8])[0]
        chunks[name] = data[pos + 8:pos + 8 + size]
        pos += 8 + size + (size & 1)
    fmt_tag, channels, rate, _, _, bits = struct.unpack("<HHIIHH", chunks[b"fmt "][:16])
    assert (fmt_tag, channels, rate, bits) == (1, 1, 8000, 16)
    assert len(chunks[b"data"]) == 2 * 321


@pytest.mark.parametrize("rate,channels,subtype,problem", [
    (44100, 1, "PCM_16", "sample_rate=44100"),
    (8000, 2, "PCM_16", "channels=2"),
    (8000, 1, "FLOAT", "subtype=FLOAT"),
])
def test_unsupported_wav_is_rejected(tmp_path, rate, channels, subtype, problem):
    path = str(tmp_path / "bad.wav")
    data = np.zeros((100, channels)) if channels > 1 else np.zeros(100)
    sf.write(path, data, rate, subtype=subtype)
    with pytest.raises(ValueError, match=problem):
        read_wav(path)


def test_missing_wav(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_wav(str(tmp_path / "nope.wav"))


# =================================================================
#  SYNTHETIC CORPUS
# =================================================================
def test_corpus_generation_is_fast_and_uncorrelated():
    start = time.time()
    records = generate_synthetic_corpus(20, 1.0, seed=0)
    assert time.time() - start < 5.0
    assert len(records) == 20
    for record in records:
        s1, s2 = record.references()
        assert len(record.mixture) == 8000
        assert abs(np.corrcoef(s1, s2)[0, 1]) < 0.2
        assert -5.0 <= record.snr_db <= 5.0
        assert abs(measured_snr(s1, s2) - record.snr_db) < 1e-6


def test_corpus_is_seeded():
    a = generate_synthetic_corpus(3, 0.2, seed=5)
    b = generate_synthetic_corpus(3, 0.2, seed=5, workers=3)
    c = generate_synthetic_corpus(3, 0.2, seed=6)
    for ra, rb in zip(a, b):
        assert np.array_equal(ra.mixture.samples, rb.mixture.samples)
        assert ra.record_id == rb.record_id
    assert not np.array_equal(a[0].mixture.samples, c[0].mixture.samples)


def test_corpus_rejects_bad_sizes():
    with pytest.raises(ValueError):
        generate_synthetic_corpus(0, 1.0)
    with pytest.raises(ValueError):
        generate_synthetic_corpus(2, 0.0)


def test_written_corpus_loads_back(corpus_dir):
    manifest = load_manifest(corpus_dir)
    assert list(manifest["id"]) == ["mix0000", "mix0001", "mix0002"]
    records = load_corpus(corpus_dir, verbose=False)
    assert [r.num_sources for r in records] == [2, 2, 2]
    assert all(len(r.mixture) == 800 for r in records)
    assert os.path.exists(os.path.join(corpus_dir, "wav", "mix0001_s2.wav"))


def test_noisy_corpus_round_trip(short_records, tmp_path):
    noisy = [add_noise(r, "gaussian", 3.0, seed=i) for i, r in enumerate(short_records[:2])]
    write_corpus(noisy, str(tmp_path), verbose=False)
    loaded = load_corpus(str(tmp_path), verbose=False)
    assert loaded[0].noise_kind == "gaussian"
    assert loaded[0].noise_snr_db == 3.0
    assert np.max(np.abs(loaded[1].noise.samples - noisy[1].noise.samples)) <= 2.0 ** -15


def test_manifest_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_manifest(str(tmp_path))
    (tmp_path / "manifest.tsv").write_text("id\tmixture_path\nx\ty.wav\n")
    with pytest.raises(ValueError, match="source_paths"):
        load_manifest(str(tmp_path))
