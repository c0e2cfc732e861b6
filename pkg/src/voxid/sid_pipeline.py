"""End-to-end closed-set speaker identification.

Two feature streams are extracted per utterance: filterbank cepstra for the
vocal tract and lag-bounded residual autocorrelation for the vocal source.
One GMM per speaker per stream forms the database; identification takes the
argmax of utterance log-likelihoods, optionally after linear score fusion.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import audio_io, corpus, gmm
from .acrlag import AcrlagConfig, extract_acrlag
from .errors import BadFileFormat, InsufficientData, VoxidError
from .features import FeatureMatrix, concatenate_features
from .gmm import GmmModel, TrainConfig
from .signal_prep import AudioSignal, FrameConfig, preprocess
from .spectral import FilterbankConfig, fb_cepstra

DB_MAGIC = b"VOXSDB"
DB_VERSION = 1


@dataclass(frozen=True)
class SpeakerEntry:
    """One speaker's utterance lists from a corpus manifest."""

    speaker_id: str
    train_utterances: tuple[str, ...]
    test_utterances: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "train_utterances", tuple(self.train_utterances))
        object.__setattr__(self, "test_utterances", tuple(self.test_utterances))
        overlap = set(self.train_utterances) & set(self.test_utterances)
        if overlap:
            raise ValueError(
                f"speaker {self.speaker_id}: train and test sets share {sorted(overlap)}"
            )


@dataclass(frozen=True)
class CorpusManifest:
    speakers: tuple[SpeakerEntry, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "speakers", tuple(self.speakers))
        ids = [s.speaker_id for s in self.speakers]
        if len(set(ids)) != len(ids):
            raise ValueError("speaker_ids must be unique")

    @property
    def speaker_ids(self) -> tuple[str, ...]:
        return tuple(s.speaker_id for s in self.speakers)


def load_manifest(path: str | Path, check_paths: bool = True) -> CorpusManifest:
    """Read a manifest JSON; utterance paths resolve relative to the file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise BadFileFormat(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict) or "speakers" not in doc:
        raise BadFileFormat(f"{path}: manifest must be an object with a 'speakers' list")
    base = path.parent
    speakers = []
    for item in doc["speakers"]:
        entry = SpeakerEntry(
            speaker_id=str(item["speaker_id"]),
            train_utterances=tuple(str(base / p) for p in item.get("train_utterances", [])),
            test_utterances=tuple(str(base / p) for p in item.get("test_utterances", [])),
        )
        speakers.append(entry)
    manifest = CorpusManifest(tuple(speakers))
    if check_paths:
        for entry in manifest.speakers:
            for p in entry.train_utterances + entry.test_utterances:
                if not Path(p).exists():
                    raise BadFileFormat(f"manifest references a missing file: {p}")
    return manifest


def save_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    """Write a manifest JSON with paths stored relative to the file."""
    path = Path(path)
    base = path.parent.resolve()

    def relativize(p: str) -> str:
        try:
            return Path(p).resolve().relative_to(base).as_posix()
        except ValueError:
            return Path(p).resolve().as_posix()

    doc = {
        "speakers": [
            {
                "speaker_id": s.speaker_id,
                "train_utterances": [relativize(p) for p in s.train_utterances],
                "test_utterances": [relativize(p) for p in s.test_utterances],
            }
            for s in manifest.speakers
        ]
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class FusionConfig:
    """Linear score-fusion weight: eta on the spectral stream."""

    eta: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the two-stream pipeline in one place."""

    frame: FrameConfig = field(default_factory=FrameConfig)
    acrlag: AcrlagConfig = field(default_factory=AcrlagConfig)
    filterbank: FilterbankConfig = field(default_factory=FilterbankConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    # Average per-frame log-likelihoods instead of summing them.  Off by
    # default: both streams see the same frames, so lengths already match.
    score_average: bool = False

    def to_json_dict(self) -> dict:
        return {
            "frame": {
                "frame_len_samples": self.frame.frame_len_samples,
                "hop_samples": self.frame.hop_samples,
                "preemphasis": self.frame.preemphasis,
                "energy_threshold_ratio": self.frame.energy_threshold_ratio,
            },
            "acrlag": {"lp_order": self.acrlag.lp_order, "max_lag": self.acrlag.max_lag},
            "filterbank": {
                "n_filters": self.filterbank.n_filters,
                "scale": self.filterbank.scale.value,
                "f_low_hz": self.filterbank.f_low_hz,
                "f_high_hz": self.filterbank.f_high_hz,
                "n_cep": self.filterbank.n_cep,
                "fft_size": self.filterbank.fft_size,
            },
            "train": {
                "n_components": self.train.n_components,
                "em_iterations": self.train.em_iterations,
                "variance_floor_ratio": self.train.variance_floor_ratio,
                "seed": self.train.seed,
            },
            "score_average": self.score_average,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "PipelineConfig":
        cfg = cls()
        return replace(
            cfg,
            frame=replace(cfg.frame, **doc.get("frame", {})),
            acrlag=replace(cfg.acrlag, **doc.get("acrlag", {})),
            filterbank=replace(cfg.filterbank, **doc.get("filterbank", {})),
            train=replace(cfg.train, **doc.get("train", {})),
            score_average=bool(doc.get("score_average", cfg.score_average)),
        )


@dataclass(frozen=True)
class SpeakerDatabase:
    """Trained spectral and residual models for every enrolled speaker."""

    config: PipelineConfig
    speaker_ids: tuple[str, ...]
    spectral_models: dict[str, GmmModel]
    residual_models: dict[str, GmmModel]

    def __post_init__(self) -> None:
        object.__setattr__(self, "speaker_ids", tuple(self.speaker_ids))
        for sid in self.speaker_ids:
            if sid not in self.spectral_models or sid not in self.residual_models:
                raise ValueError(f"speaker {sid} is missing a stream model")

    @property
    def n_speakers(self) -> int:
        return len(self.speaker_ids)


def utterance_features(
    audio: AudioSignal, config: PipelineConfig
) -> tuple[FeatureMatrix, FeatureMatrix]:
    """(spectral, residual) feature matrices from one preprocessing pass."""
    frames = preprocess(audio, config.frame)
    return fb_cepstra(frames, config.filterbank), extract_acrlag(frames, config.acrlag)


def _stream_features(
    paths: Sequence[str], config: PipelineConfig, speaker_id: str
) -> tuple[FeatureMatrix, FeatureMatrix]:
    spectral_parts, residual_parts = [], []
    for p in paths:
        try:
            spectral, residual = utterance_features(audio_io.read_wav(p), config)
        except VoxidError as exc:
            raise type(exc)(f"{speaker_id}: {p}: {exc}") from None
        spectral_parts.append(spectral)
        residual_parts.append(residual)
    return concatenate_features(spectral_parts), concatenate_features(residual_parts)


def train_database(manifest: CorpusManifest, config: PipelineConfig) -> SpeakerDatabase:
    """Fit one model per stream per speaker from the manifest's train lists."""
    if not manifest.speakers:
        raise InsufficientData("manifest lists no speakers")
    spectral_models: dict[str, GmmModel] = {}
    residual_models: dict[str, GmmModel] = {}
    for entry in manifest.speakers:
        if not entry.train_utterances:
            raise InsufficientData(f"speaker {entry.speaker_id} has no train utterances")
        spectral, residual = _stream_features(
            entry.train_utterances, config, entry.speaker_id
        )
        for stream, feats, store in (
            ("spectral", spectral, spectral_models),
            ("residual", residual, residual_models),
        ):
            try:
                store[entry.speaker_id] = gmm.train_gmm(feats, config.train)
            except InsufficientData as exc:
                raise InsufficientData(
                    f"speaker {entry.speaker_id}, {stream} stream: {exc}"
                ) from None
    return SpeakerDatabase(
        config=config,
        speaker_ids=manifest.speaker_ids,
        spectral_models=spectral_models,
        residual_models=residual_models,
    )


@dataclass(frozen=True)
class SpeakerScores:
    speaker_id: str
    spectral: float | None
    residual: float | None


def score_utterance(db: SpeakerDatabase, audio: AudioSignal) -> tuple[SpeakerScores, ...]:
    """Both streams' log-likelihoods against every enrolled speaker.

    A stream that yields no features for this utterance scores None for all
    speakers; preprocessing failures propagate to the caller.
    """
    if not db.speaker_ids:
        raise InsufficientData("speaker database is empty")
    frames = preprocess(audio, db.config.frame)
    average = db.config.score_average
    try:
        spectral = fb_cepstra(frames, db.config.filterbank)
        spectral_scores = {
            sid: gmm.utterance_score(db.spectral_models[sid], spectral, average)
            for sid in db.speaker_ids
        }
    except VoxidError:
        spectral_scores = None
    try:
        residual = extract_acrlag(frames, db.config.acrlag)
        residual_scores = {
            sid: gmm.utterance_score(db.residual_models[sid], residual, average)
            for sid in db.speaker_ids
        }
    except VoxidError:
        residual_scores = None
    if spectral_scores is None and residual_scores is None:
        raise InsufficientData("both feature streams failed for this utterance")
    return tuple(
        SpeakerScores(
            sid,
            spectral_scores[sid] if spectral_scores else None,
            residual_scores[sid] if residual_scores else None,
        )
        for sid in db.speaker_ids
    )


def fuse_scores(spectral: float, residual: float, cfg: FusionConfig = FusionConfig()) -> float:
    """Linear score fusion: eta * spectral + (1 - eta) * residual."""
    return cfg.eta * spectral + (1.0 - cfg.eta) * residual


def _argmax_speaker(scores: dict[str, float]) -> str:
    """Highest score wins; exact ties go to the smallest speaker_id."""
    best_id = None
    best = -np.inf
    for sid in sorted(scores):
        if scores[sid] > best:
            best_id, best = sid, scores[sid]
    if best_id is None:
        raise InsufficientData("no scores to rank")
    return best_id


@dataclass(frozen=True)
class IdentificationResult:
    """Per-stream and fused winners for one utterance."""

    fused_winner: str
    spectral_winner: str | None
    residual_winner: str | None
    scores: tuple[SpeakerScores, ...]
    eta: float

    def fused_scores(self) -> dict[str, float]:
        return _fused_score_dict(self.scores, FusionConfig(self.eta))


def _fused_score_dict(
    scores: Iterable[SpeakerScores], cfg: FusionConfig
) -> dict[str, float]:
    """Fused per-speaker scores; a missing stream falls back to the other."""
    fused = {}
    for s in scores:
        if s.spectral is not None and s.residual is not None:
            fused[s.speaker_id] = fuse_scores(s.spectral, s.residual, cfg)
        elif s.spectral is not None:
            fused[s.speaker_id] = s.spectral
        elif s.residual is not None:
            fused[s.speaker_id] = s.residual
    return fused


def identify(
    db: SpeakerDatabase, audio: AudioSignal, cfg: FusionConfig = FusionConfig()
) -> IdentificationResult:
    """Closed-set identification: argmax per stream and over fused scores."""
    scores = score_utterance(db, audio)
    spectral = {s.speaker_id: s.spectral for s in scores if s.spectral is not None}
    residual = {s.speaker_id: s.residual for s in scores if s.residual is not None}
    fused = _fused_score_dict(scores, cfg)
    return IdentificationResult(
        fused_winner=_argmax_speaker(fused),
        spectral_winner=_argmax_speaker(spectral) if spectral else None,
        residual_winner=_argmax_speaker(residual) if residual else None,
        scores=scores,
        eta=cfg.eta,
    )


@dataclass(frozen=True)
class ScoredTrial:
    """Raw per-speaker scores for one test utterance, before fusion."""

    true_speaker: str
    utterance: str
    spectral_scores: dict[str, float] | None
    residual_scores: dict[str, float] | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.spectral_scores is None and self.residual_scores is None


@dataclass(frozen=True)
class TrialResult:
    """One scored trial with winners resolved at a specific eta."""

    true_speaker: str
    utterance: str
    spectral_winner: str | None
    residual_winner: str | None
    fused_winner: str | None
    error: str | None

    def to_json_dict(self) -> dict:
        return {
            "true_speaker": self.true_speaker,
            "utterance": self.utterance,
            "spectral_winner": self.spectral_winner,
            "residual_winner": self.residual_winner,
            "fused_winner": self.fused_winner,
            "error": self.error,
        }


@dataclass(frozen=True)
class EvalReport:
    """Closed-set identification accuracy per stream and fused."""

    eta: float
    trials: tuple[TrialResult, ...]
    n_trials: int
    n_scored: int
    n_failed: int
    correct_spectral: int
    correct_residual: int
    correct_fused: int

    @property
    def pia_spectral(self) -> float:
        return 100.0 * self.correct_spectral / self.n_scored

    @property
    def pia_residual(self) -> float:
        return 100.0 * self.correct_residual / self.n_scored

    @property
    def pia_fused(self) -> float:
        return 100.0 * self.correct_fused / self.n_scored

    def to_json_dict(self) -> dict:
        return {
            "eta": self.eta,
            "n_trials": self.n_trials,
            "n_scored": self.n_scored,
            "n_failed": self.n_failed,
            "correct_spectral": self.correct_spectral,
            "correct_residual": self.correct_residual,
            "correct_fused": self.correct_fused,
            "pia_spectral": self.pia_spectral,
            "pia_residual": self.pia_residual,
            "pia_fused": self.pia_fused,
            "trials": [t.to_json_dict() for t in self.trials],
        }


def score_manifest(db: SpeakerDatabase, manifest: CorpusManifest) -> tuple[ScoredTrial, ...]:
    """Score every test utterance against every speaker, recording failures."""
    trials = []
    for entry in manifest.speakers:
        for path in entry.test_utterances:
            try:
                scores = score_utterance(db, audio_io.read_wav(path))
            except VoxidError as exc:
                trials.append(
                    ScoredTrial(entry.speaker_id, path, None, None, error=str(exc))
                )
                continue
            spectral = {s.speaker_id: s.spectral for s in scores if s.spectral is not None}
            residual = {s.speaker_id: s.residual for s in scores if s.residual is not None}
            trials.append(
                ScoredTrial(
                    entry.speaker_id,
                    path,
                    spectral or None,
                    residual or None,
                )
            )
    return tuple(trials)


def report_from_scores(
    trials: Sequence[ScoredTrial], cfg: FusionConfig = FusionConfig()
) -> EvalReport:
    """Resolve winners at the given eta and tally identification accuracy.

    Trials where every stream failed are reported but excluded from the
    accuracy denominator; a trial with one live stream stays in the
    denominator for all streams.
    """
    results = []
    n_scored = n_failed = 0
    correct = {"spectral": 0, "residual": 0, "fused": 0}
    for trial in trials:
        if trial.failed:
            n_failed += 1
            results.append(
                TrialResult(trial.true_speaker, trial.utterance, None, None, None, trial.error)
            )
            continue
        n_scored += 1
        pairs = tuple(
            SpeakerScores(
                sid,
                trial.spectral_scores.get(sid) if trial.spectral_scores else None,
                trial.residual_scores.get(sid) if trial.residual_scores else None,
            )
            for sid in sorted(
                (trial.spectral_scores or trial.residual_scores or {}).keys()
            )
        )
        spectral_winner = (
            _argmax_speaker(trial.spectral_scores) if trial.spectral_scores else None
        )
        residual_winner = (
            _argmax_speaker(trial.residual_scores) if trial.residual_scores else None
        )
        fused_winner = _argmax_speaker(_fused_score_dict(pairs, cfg))
        if spectral_winner == trial.true_speaker:
            correct["spectral"] += 1
        if residual_winner == trial.true_speaker:
            correct["residual"] += 1
        if fused_winner == trial.true_speaker:
            correct["fused"] += 1
        results.append(
            TrialResult(
                trial.true_speaker,
                trial.utterance,
                spectral_winner,
                residual_winner,
                fused_winner,
                trial.error,
            )
        )
    if n_scored == 0:
        raise InsufficientData("every test utterance failed; nothing to evaluate")
    return EvalReport(
        eta=cfg.eta,
        trials=tuple(results),
        n_trials=len(trials),
        n_scored=n_scored,
        n_failed=n_failed,
        correct_spectral=correct["spectral"],
        correct_residual=correct["residual"],
        correct_fused=correct["fused"],
    )


def evaluate(
    db: SpeakerDatabase, manifest: CorpusManifest, cfg: FusionConfig = FusionConfig()
) -> EvalReport:
    """Full evaluation pass: PIA per stream and fused at the given eta."""
    return report_from_scores(score_manifest(db, manifest), cfg)


def fusion_sweep(
    db: SpeakerDatabase, manifest: CorpusManifest, etas: Sequence[float]
) -> list[EvalReport]:
    """Evaluate once, then re-fuse at every eta in the grid."""
    trials = score_manifest(db, manifest)
    return [report_from_scores(trials, FusionConfig(eta)) for eta in etas]


def database_to_bytes(db: SpeakerDatabase) -> bytes:
    config_json = json.dumps(db.config.to_json_dict(), sort_keys=True).encode("utf-8")
    out = [
        DB_MAGIC,
        struct.pack("<H", DB_VERSION),
        struct.pack("<I", len(config_json)),
        config_json,
        struct.pack("<I", db.n_speakers),
    ]
    for sid in db.speaker_ids:
        sid_bytes = sid.encode("utf-8")
        spectral = gmm.model_to_bytes(db.spectral_models[sid])
        residual = gmm.model_to_bytes(db.residual_models[sid])
        out.append(struct.pack("<I", len(sid_bytes)))
        out.append(sid_bytes)
        out.append(struct.pack("<Q", len(spectral)))
        out.append(spectral)
        out.append(struct.pack("<Q", len(residual)))
        out.append(residual)
    return b"".join(out)


def database_from_bytes(blob: bytes) -> SpeakerDatabase:
    if len(blob) < len(DB_MAGIC) + 2 or blob[: len(DB_MAGIC)] != DB_MAGIC:
        raise BadFileFormat(
            f"bad database magic {blob[:len(DB_MAGIC)]!r}, expected {DB_MAGIC!r}"
        )
    off = len(DB_MAGIC)
    (version,) = struct.unpack_from("<H", blob, off)
    off += 2
    if version != DB_VERSION:
        raise BadFileFormat(f"unsupported database version {version}, expected {DB_VERSION}")
    (config_len,) = struct.unpack_from("<I", blob, off)
    off += 4
    config = PipelineConfig.from_json_dict(json.loads(blob[off : off + config_len]))
    off += config_len
    (n_speakers,) = struct.unpack_from("<I", blob, off)
    off += 4
    speaker_ids = []
    spectral_models: dict[str, GmmModel] = {}
    residual_models: dict[str, GmmModel] = {}
    for _ in range(n_speakers):
        (sid_len,) = struct.unpack_from("<I", blob, off)
        off += 4
        sid = blob[off : off + sid_len].decode("utf-8")
        off += sid_len
        (spectral_len,) = struct.unpack_from("<Q", blob, off)
        off += 8
        spectral_models[sid] = gmm.model_from_bytes(blob[off : off + spectral_len])
        off += spectral_len
        (residual_len,) = struct.unpack_from("<Q", blob, off)
        off += 8
        residual_models[sid] = gmm.model_from_bytes(blob[off : off + residual_len])
        off += residual_len
        speaker_ids.append(sid)
    if off != len(blob):
        raise BadFileFormat(f"{len(blob) - off} trailing bytes after database payload")
    return SpeakerDatabase(
        config=config,
        speaker_ids=tuple(speaker_ids),
        spectral_models=spectral_models,
        residual_models=residual_models,
    )


def save_database(db: SpeakerDatabase, path: str | Path) -> None:
    Path(path).write_bytes(database_to_bytes(db))


def load_database(path: str | Path) -> SpeakerDatabase:
    return database_from_bytes(Path(path).read_bytes())


def synth_corpus(
    out_dir: str | Path,
    n_speakers: int = 10,
    train_utterances: int = 10,
    test_utterances: int = 10,
    train_seconds: float = 4.0,
    test_seconds: float = 3.0,
    seed: int = 0,
    sample_rate_hz: int = corpus.SAMPLE_RATE_HZ,
) -> tuple[CorpusManifest, Path]:
    """Generate the synthetic corpus on disk and write its manifest.

    Speakers 0 and 1 share a vocal tract and differ only in pitch period, so
    envelope features confuse them while residual features can tell them
    apart.  Everything is deterministic in the seed, down to the WAV bytes.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    voices = corpus.make_voices(n_speakers, seed)
    entries = []
    for index, voice in enumerate(voices):
        speaker_dir = out_dir / voice.speaker_id
        speaker_dir.mkdir(exist_ok=True)
        train_paths, test_paths = [], []
        splits = (
            ("train", train_utterances, train_seconds, train_paths),
            ("test", test_utterances, test_seconds, test_paths),
        )
        utterance_index = 0
        for split, count, seconds, bucket in splits:
            for i in range(count):
                rng = corpus.utterance_rng(seed, index, utterance_index)
                utterance_index += 1
                samples = corpus.synth_utterance(rng, voice, seconds, sample_rate_hz)
                wav_path = speaker_dir / f"{split}_{i:02d}.wav"
                audio_io.write_wav(wav_path, AudioSignal(samples, sample_rate_hz))
                bucket.append(str(wav_path))
        entries.append(
            SpeakerEntry(voice.speaker_id, tuple(train_paths), tuple(test_paths))
        )
    manifest = CorpusManifest(tuple(entries))
    manifest_path = out_dir / "manifest.json"
    save_manifest(manifest, manifest_path)
    return manifest, manifest_path
