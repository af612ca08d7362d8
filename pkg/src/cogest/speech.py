"""Speech input pipeline timing: pause-filter segmentation and recognition latency.

Recognition itself is assumed correct; what this module reproduces is the
temporal behaviour of the speech path — utterances separated by less than the
voice-activity pause filter merge into one, and every recognized transcript
arrives a seeded-random delay after the speech ended.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field


class OutOfOrder(Exception):
    """Utterance stream not sorted by speech_start."""


@dataclass(frozen=True)
class UtteranceEvent:
    text: str
    speech_start: float
    speech_end: float

    def __post_init__(self) -> None:
        if self.speech_end < self.speech_start:
            raise ValueError("speech_end before speech_start")


@dataclass(frozen=True)
class SpeechTranscript:
    text: str
    speech_end: float
    recognized_at: float


@dataclass(frozen=True)
class SpeechChannelConfig:
    pause_filter: float = 0.5
    latency_mean: float = 1.9
    latency_jitter: float = 0.2  # uniform half-width around the mean
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.pause_filter < 0:
            raise ValueError("pause_filter must be >= 0")
        if self.latency_jitter < 0:
            raise ValueError("latency_jitter must be >= 0")
        if self.latency_mean < self.pause_filter:
            raise ValueError("latency_mean must be >= pause_filter")
        if self.latency_mean - self.latency_jitter < self.pause_filter:
            raise ValueError("latency_mean - latency_jitter must be >= pause_filter")


def _merge(a: UtteranceEvent, b: UtteranceEvent) -> UtteranceEvent:
    return UtteranceEvent(
        text=f"{a.text} {b.text}",
        speech_start=a.speech_start,
        speech_end=max(a.speech_end, b.speech_end),
    )


class SpeechChannel:
    """Stateful stream transformer for one speech input channel.

    ``push`` feeds utterances in speech_start order and returns any segments
    that became final; ``poll`` finalizes a held segment once the pause
    filter has elapsed without new speech; ``recognize`` stamps a transcript
    with the seeded latency model. One consumer per instance.
    """

    def __init__(self, config: SpeechChannelConfig | None = None) -> None:
        self.config = config or SpeechChannelConfig()
        self._rng = random.Random(self.config.rng_seed)
        self._held: UtteranceEvent | None = None
        self._last_start: float | None = None

    def push(self, event: UtteranceEvent) -> list[UtteranceEvent]:
        if self._last_start is not None and event.speech_start < self._last_start:
            raise OutOfOrder(
                f"utterance at {event.speech_start} after one at {self._last_start}"
            )
        self._last_start = event.speech_start

        released: list[UtteranceEvent] = []
        if self._held is None:
            self._held = event
        elif event.speech_start - self._held.speech_end < self.config.pause_filter:
            self._held = _merge(self._held, event)
        else:
            released.append(self._held)
            self._held = event
        return released

    @property
    def has_held(self) -> bool:
        return self._held is not None

    def poll(self, now: float) -> list[UtteranceEvent]:
        """Release the held segment once silence has outlasted the pause filter."""
        if self._held is not None and now - self._held.speech_end >= self.config.pause_filter:
            released = [self._held]
            self._held = None
            return released
        return []

    def flush(self) -> list[UtteranceEvent]:
        if self._held is None:
            return []
        released = [self._held]
        self._held = None
        return released

    def recognize(self, utterance: UtteranceEvent) -> SpeechTranscript:
        cfg = self.config
        delay = self._rng.uniform(
            cfg.latency_mean - cfg.latency_jitter, cfg.latency_mean + cfg.latency_jitter
        )
        return SpeechTranscript(
            text=utterance.text,
            speech_end=utterance.speech_end,
            recognized_at=utterance.speech_end + delay,
        )


def segment(
    events: list[UtteranceEvent], config: SpeechChannelConfig | None = None
) -> list[UtteranceEvent]:
    """Batch segmentation: merge utterances separated by sub-filter gaps."""
    channel = SpeechChannel(config or SpeechChannelConfig())
    out: list[UtteranceEvent] = []
    for event in events:
        out.extend(channel.push(event))
    out.extend(channel.flush())
    return out
