import os
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import pandas as pd

from audio import MixtureRecord
from metrics import pit_loss
from models import ModelConfig, SeparationModel, SharingConfig, preset
from numeric import Tape
from numeric import functional as F
from utils.file_handler import load_checkpoint, restore_store, save_checkpoint, save_table
from .adam import AdamOptimizer, clip_grad_norm


class TrainingDivergedError(RuntimeError):
    """Non-finite loss or gradient; the last good checkpoint is left untouched."""

    def __init__(self, step: int, last_checkpoint: Optional[str], detail: str = "non-finite loss"):
        self.step = step
        self.last_checkpoint = last_checkpoint
        where = last_checkpoint or "<none written yet>"
        super().__init__(f"Training diverged at step {step} ({detail}); last good checkpoint: {where}")


@dataclass
class TrainConfig:
    """Training recipe: Adam 1e-3, clip 5, 1-second segments, batch 4."""

    model: ModelConfig = field(default_factory=lambda: preset("tiny").with_sharing(SharingConfig.parse("ss")))
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_norm: float = 5.0
    segment: int = 8000
    batch_size: int = 4
    max_steps: int = 3000
    seed: int = 0
    checkpoint_path: str = "result/model.ckpt"
    log_path: Optional[str] = None  # defaults to <checkpoint>.log.csv
    max_time: Optional[float] = None  # seconds
    log_every: int = 100
    checkpoint_every: int = 0  # 0: only at the end
    resume: bool = False

    def validate(self) -> "TrainConfig":
        self.model.validate()
        if self.clip_norm <= 0:
            raise ValueError(f"clip_norm must be > 0, got {self.clip_norm}.")
        if self.segment < self.model.L:
            raise ValueError(f"segment={self.segment} is shorter than the encoder window L={self.model.L}.")
        for name in ("batch_size", "max_steps", "log_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"TrainConfig.{name} must be >= 1, got {getattr(self, name)}.")
        if self.checkpoint_every < 0:
            raise ValueError(f"checkpoint_every must be >= 0, got {self.checkpoint_every}.")
        return self

    @property
    def resolved_log_path(self) -> str:
        return self.log_path or os.path.splitext(self.checkpoint_path)[0] + ".log.csv"


@dataclass
class TrainResult:
    steps: int
    final_loss: float
    best_loss: float
    best_step: int
    elapsed_s: float
    checkpoint_path: str
    log_path: str
    losses: List[float]


class SeparationTrainer:
    """
    PIT training loop over random segments of a corpus.

    Every step draws its batch from ``default_rng([seed, step])``, so a run
    resumed from a checkpoint replays exactly the batches of an
    uninterrupted one.
    """

    def __init__(self, config: TrainConfig, records: List[MixtureRecord], verbose: bool = True):
        self.config = config.validate()
        if not records:
            raise ValueError("Training corpus is empty.")
        sources = {r.num_sources for r in records}
        if sources != {config.model.C}:
            raise ValueError(f"Corpus records carry {sorted(sources)} sources but the model separates C={config.model.C}.")
        self.records = records
        self.verbose = verbose

        self.start_step = 1
        self.last_checkpoint: Optional[str] = None
        store = None
        resume_state = None
        if config.resume and os.path.exists(config.checkpoint_path):
            checkpoint = load_checkpoint(config.checkpoint_path)
            store = restore_store(checkpoint, config.model, np.float32)
            resume_state = checkpoint
            self.start_step = checkpoint.step + 1
            self.last_checkpoint = config.checkpoint_path

        self.model = SeparationModel(config.model, store, seed=config.seed, dtype=np.float32)
        self.params = dict(self.model.store.items())
        self.optimizer = AdamOptimizer(self.params, lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.eps)
        if resume_state is not None and resume_state.optimizer_state:
            self.optimizer.load_state_dict(resume_state.optimizer_state, t=resume_state.step)

        self.log_rows: List[dict] = []
        if resume_state is not None and os.path.exists(config.resolved_log_path):
            previous = pd.read_csv(config.resolved_log_path)
            self.log_rows = previous[previous["step"] < self.start_step].to_dict("records")

        best = resume_state.manifest.get("extra", {}).get("best") if resume_state is not None else None
        self.best_loss = float(best["loss"]) if best else float("inf")
        self.best_step = int(best["step"]) if best else 0
        self.losses: List[float] = [row["loss"] for row in self.log_rows]
        self.start_time = time.time()

    # --- batches ---
    def _sample_batch(self, step: int):
        rng = np.random.default_rng([self.config.seed, step])
        batch = []
        for _ in range(self.config.batch_size):
            record = self.records[int(rng.integers(len(self.records)))]
            length = len(record.mixture)
            seg = min(self.config.segment, length)
            start = int(rng.integers(length - seg + 1))
            batch.append((record.mixture.samples[start:start + seg], record.references()[:, start:start + seg]))
        return batch

    def _batch_loss(self, batch):
        total = None
        for mixture, references in batch:
            sources = self.model(mixture).sources
            refs = references[:, :sources.shape[1]].astype(np.float32)
            loss, _ = pit_loss(sources, refs)
            total = loss if total is None else F.add(total, loss)
        return F.mul(total, 1.0 / len(batch))

    # --- main loop ---
    def train(self) -> TrainResult:
        cfg = self.config
        if self.verbose:
            print(f"\n--- STARTING TRAINING ---")
            print(f"Model: {cfg.model.family} | scheme {cfg.model.sharing} | {self.model.store.num_parameters():,d} params")
            print(f"Parameters: Max Steps={cfg.max_steps}, Max Time={cfg.max_time}s, Batch={cfg.batch_size}, Segment={cfg.segment}")
            if self.start_step > 1:
                print(f"Resuming from step {self.start_step - 1} ({cfg.checkpoint_path})")
            print("-" * 60)

        last_step = self.start_step - 1
        for step in range(self.start_step, cfg.max_steps + 1):
            # 1. check elapsed time
            if cfg.max_time is not None and time.time() - self.start_time > cfg.max_time:
                if self.verbose:
                    print(f"\n[STOP] reached time limit at step {step}.")
                break

            # 2. forward + backward on one tape
            with Tape() as tape:
                loss = self._batch_loss(self._sample_batch(step))
            loss_value = loss.item()
            if not np.isfinite(loss_value):
                raise TrainingDivergedError(step, self.last_checkpoint)
            tape.backward(loss)

            # 3. clip + update
            grad_norm = clip_grad_norm(self.params, cfg.clip_norm)
            if not np.isfinite(grad_norm):
                raise TrainingDivergedError(step, self.last_checkpoint, detail="non-finite gradient")
            self.optimizer.step()
            self.optimizer.zero_grad()
            last_step = step

            self.losses.append(loss_value)
            self.log_rows.append({
                "step": step,
                "loss": loss_value,
                "grad_norm": grad_norm,
                "elapsed_s": round(time.time() - self.start_time, 3),
            })
            if loss_value < self.best_loss:
                self.best_loss, self.best_step = loss_value, step

            # Logging
            if self.verbose and step % cfg.log_every == 0:
                print(f"Step {step:5d} | Loss: {loss_value:9.4f} | Grad norm: {grad_norm:9.4f} | Best: {self.best_loss:9.4f}")

            if cfg.checkpoint_every and step % cfg.checkpoint_every == 0:
                self._save(step)

        # --- FINISH ---
        return self._finalize(last_step)

    #  HELPER METHODS

    def _save(self, step: int):
        save_checkpoint(
            self.config.checkpoint_path,
            self.config.model,
            self.model.store,
            seed=self.config.seed,
            step=step,
            optimizer_state=self.optimizer.state_dict(),
            extra={"best": {"loss": self.best_loss, "step": self.best_step}} if self.best_step else None,
            verbose=self.verbose,
        )
        self.last_checkpoint = self.config.checkpoint_path
        self._write_log()

    def _write_log(self):
        df = pd.DataFrame(self.log_rows, columns=["step", "loss", "grad_norm", "elapsed_s"])
        save_table(df, self.config.resolved_log_path, verbose=False)

    def _finalize(self, steps_run: int) -> TrainResult:
        self._save(steps_run)
        elapsed = time.time() - self.start_time
        final_loss = self.losses[-1] if self.losses else float("nan")
        if self.verbose:
            print("\n" + "=" * 50)
            print("TRAINING COMPLETE")
            print(f"Final loss: {final_loss:.4f} (best {self.best_loss:.4f} at step {self.best_step})")
            print(f"Total steps: {steps_run}")
            print(f"Elapsed time: {elapsed:.2f}s")
            print(f"Checkpoint: {self.config.checkpoint_path}")
            print("=" * 50)
        return TrainResult(
            steps=steps_run,
            final_loss=final_loss,
            best_loss=self.best_loss,
            best_step=self.best_step,
            elapsed_s=elapsed,
            checkpoint_path=self.config.checkpoint_path,
            log_path=self.config.resolved_log_path,
            losses=list(self.losses),
        )
