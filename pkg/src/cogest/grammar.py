"""Speech command grammar: tokenizer, parser and the fixed command vocabulary.

The grammar is deliberately small — a handful of action verbs, two object
classes, four deictic words and two targets. Everything else in an utterance
(articles, politeness, hesitations, unknown words) is treated as noise and
dropped before parsing.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable


class Verb(Enum):
    PICK = "pick"
    PLACE = "place"
    GIVE = "give"
    GO_HOME = "go_home"
    STOP = "stop"
    PAUSE = "pause"
    CONTINUE = "continue"


class ObjectClass(Enum):
    ROD = "rod"
    ROCKER_ARM = "rocker_arm"


class Deixis(Enum):
    NONE = "none"
    THIS = "this"
    THAT = "that"
    ANOTHER = "another"
    LAST = "last"


class Target(Enum):
    NONE = "none"
    HUMAN = "human"
    HOME = "home"


# Verbs that only affect robot motion state and never carry an object.
MOTION_STATE_VERBS = frozenset({Verb.STOP, Verb.PAUSE, Verb.CONTINUE})
# Verbs that act on a scene object.
OBJECT_VERBS = frozenset({Verb.PICK, Verb.PLACE, Verb.GIVE})


class ParseError(Exception):
    """Base class for utterance parsing failures."""


class NoVerb(ParseError):
    """No action verb found in the utterance."""


class AmbiguousIntent(ParseError):
    """Contradictory verbs (a halting verb together with continue)."""


class MissingObject(ParseError):
    """Pick/place request without an object class or deictic reference."""


@dataclass(frozen=True)
class Vocabulary:
    """Word tables driving tokenization and parsing.

    ``action_verbs`` maps single words to verbs, ``object_words`` maps word
    sequences (stored space-joined) to object classes. Fillers are dropped
    on sight; unknown words receive the same treatment.
    """

    action_verbs: dict[str, Verb] = field(default_factory=dict)
    object_words: dict[str, ObjectClass] = field(default_factory=dict)
    deixis_words: dict[str, Deixis] = field(default_factory=dict)
    target_words: dict[str, Target] = field(default_factory=dict)
    filler_words: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        categories = [
            set(self.action_verbs),
            {w for phrase in self.object_words for w in phrase.split()},
            set(self.deixis_words),
            set(self.target_words),
            set(self.filler_words),
        ]
        seen: set[str] = set()
        for cat in categories:
            dup = seen & cat
            if dup:
                raise ValueError(f"words mapped to two categories: {sorted(dup)}")
            seen |= cat

    @property
    def object_phrase_pieces(self) -> frozenset[str]:
        return frozenset(w for phrase in self.object_words for w in phrase.split())

    def max_object_phrase_len(self) -> int:
        return max((len(p.split()) for p in self.object_words), default=1)


def default_vocabulary() -> Vocabulary:
    """The fixed workcell vocabulary: seven verbs, two part classes."""
    return Vocabulary(
        action_verbs={
            "pick": Verb.PICK,
            "place": Verb.PLACE,
            "give": Verb.GIVE,
            "go": Verb.GO_HOME,
            "stop": Verb.STOP,
            "pause": Verb.PAUSE,
            "continue": Verb.CONTINUE,
        },
        object_words={
            "rod": ObjectClass.ROD,
            "rocker arm": ObjectClass.ROCKER_ARM,
        },
        deixis_words={
            "this": Deixis.THIS,
            "that": Deixis.THAT,
            "another": Deixis.ANOTHER,
            "last": Deixis.LAST,
        },
        target_words={
            "me": Target.HUMAN,
            "home": Target.HOME,
        },
        filler_words=frozenset(
            {
                "ok",
                "okay",
                "oh",
                "hey",
                "please",
                "the",
                "a",
                "an",
                "up",
                "to",
                "and",
                "now",
                "then",
                "robot",
            }
        ),
    )


def load_vocabulary(path: str) -> Vocabulary:
    """Load a vocabulary from an INI-style file, one section per category.

    Sections: ``[verbs]``, ``[objects]``, ``[deixis]``, ``[targets]`` map
    word (or phrase) to canonical value; ``[fillers]`` lists bare words.
    """
    cp = configparser.ConfigParser(allow_no_value=True, delimiters=("=",))
    cp.optionxform = str.lower  # type: ignore[assignment]
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)

    def section(name: str) -> dict[str, str]:
        return dict(cp[name]) if cp.has_section(name) else {}

    verbs = {w: Verb(v) for w, v in section("verbs").items()}
    objects = {w: ObjectClass(v) for w, v in section("objects").items()}
    deixis = {w: Deixis(v) for w, v in section("deixis").items()}
    targets = {w: Target(v) for w, v in section("targets").items()}
    fillers = frozenset(section("fillers"))
    return Vocabulary(verbs, objects, deixis, targets, fillers)


@dataclass(frozen=True)
class CommandIntent:
    """A structured command extracted from one utterance."""

    verb: Verb
    object_class: ObjectClass | None = None
    deixis: Deixis = Deixis.NONE
    target: Target = Target.NONE

    def requires_object(self) -> bool:
        return self.verb in OBJECT_VERBS

    def requires_pointing(self) -> bool:
        return self.deixis in (Deixis.THIS, Deixis.THAT)


_WORD_RE = re.compile(r"[a-z0-9_]+")


def tokenize(text: str, vocab: Vocabulary | None = None) -> list[str]:
    """Reduce a raw transcript to the vocabulary tokens it contains.

    Lowercases, strips punctuation, drops fillers and unknown words, and
    merges multi-word object class names ("rocker arm") into single tokens.
    """
    vocab = vocab or default_vocabulary()
    words = _WORD_RE.findall(text.lower())

    pieces = vocab.object_phrase_pieces
    known = (
        set(vocab.action_verbs) | set(vocab.deixis_words) | set(vocab.target_words) | pieces
    )
    kept = [w for w in words if w in known]

    # Longest-match merge of object phrases; fillers were already removed so
    # "rocker arm" survives interleaved noise ("rocker, uh, arm").
    merged: list[str] = []
    max_len = vocab.max_object_phrase_len()
    i = 0
    while i < len(kept):
        for n in range(min(max_len, len(kept) - i), 0, -1):
            candidate = " ".join(kept[i : i + n])
            if candidate in vocab.object_words:
                merged.append("_".join(kept[i : i + n]))
                i += n
                break
        else:
            word = kept[i]
            # Leftover fragments of an object phrase ("arm" alone) mean nothing.
            if word in pieces and word not in vocab.object_words:
                i += 1
                continue
            merged.append(word)
            i += 1
    return merged


def _lookup_object(token: str, vocab: Vocabulary) -> ObjectClass | None:
    return vocab.object_words.get(token.replace("_", " "))


def parse(tokens: Iterable[str], vocab: Vocabulary | None = None) -> CommandIntent:
    """Turn a token sequence into a CommandIntent.

    The first action verb wins; "go" yields to a later pick/place/give
    ("go pick the rod" means pick). A halting verb combined with continue
    is contradictory and raises AmbiguousIntent. Tokens outside the
    vocabulary are skipped, so raw (untokenized) sequences also parse.
    """
    vocab = vocab or default_vocabulary()
    tokens = list(tokens)

    verbs = [vocab.action_verbs[t] for t in tokens if t in vocab.action_verbs]
    if not verbs:
        raise NoVerb(f"no action verb in {tokens!r}")
    if Verb.CONTINUE in verbs and (Verb.STOP in verbs or Verb.PAUSE in verbs):
        raise AmbiguousIntent(f"contradictory motion-state verbs in {tokens!r}")

    verb = verbs[0]
    if verb is Verb.GO_HOME:
        # "go" is a weak auxiliary: "go pick the rod" means pick.
        main = next((v for v in verbs[1:] if v in OBJECT_VERBS), None)
        if main is not None:
            verb = main

    if verb in MOTION_STATE_VERBS:
        return CommandIntent(verb=verb)
    if verb is Verb.GO_HOME:
        return CommandIntent(verb=verb, target=Target.HOME)

    object_class: ObjectClass | None = None
    deixis = Deixis.NONE
    target = Target.NONE
    for tok in tokens:
        if object_class is None:
            cls = _lookup_object(tok, vocab)
            if cls is not None:
                object_class = cls
                continue
        if deixis is Deixis.NONE and tok in vocab.deixis_words:
            deixis = vocab.deixis_words[tok]
            continue
        if target is Target.NONE and tok in vocab.target_words:
            target = vocab.target_words[tok]

    if verb is Verb.GIVE:
        target = Target.HUMAN

    if object_class is None and deixis is Deixis.NONE and verb in (Verb.PICK, Verb.PLACE):
        raise MissingObject(f"{verb.value} without object class or deixis")
    if (
        deixis in (Deixis.THIS, Deixis.THAT)
        and object_class is None
        and verb not in (Verb.PICK, Verb.GIVE)
    ):
        # Bare this/that only identifies an object for pick/give.
        raise MissingObject(f"{verb.value} {deixis.value} without object class")

    return CommandIntent(verb=verb, object_class=object_class, deixis=deixis, target=target)


def parse_phrase(text: str, vocab: Vocabulary | None = None) -> CommandIntent:
    """tokenize + parse in one step."""
    vocab = vocab or default_vocabulary()
    return parse(tokenize(text, vocab), vocab)


_CANONICAL_VERB = {
    Verb.PICK: "pick",
    Verb.PLACE: "place",
    Verb.GIVE: "give",
    Verb.GO_HOME: "go",
    Verb.STOP: "stop",
    Verb.PAUSE: "pause",
    Verb.CONTINUE: "continue",
}

_CANONICAL_OBJECT = {
    ObjectClass.ROD: "rod",
    ObjectClass.ROCKER_ARM: "rocker arm",
}

_CANONICAL_TARGET = {Target.HUMAN: "me", Target.HOME: "home"}


def render_phrase(intent: CommandIntent) -> str:
    """Canonical phrase for an intent: verb, target, deixis, object."""
    words = [_CANONICAL_VERB[intent.verb]]
    if intent.target is not Target.NONE:
        words.append(_CANONICAL_TARGET[intent.target])
    if intent.deixis is not Deixis.NONE:
        words.append(intent.deixis.value)
    if intent.object_class is not None:
        words.append(_CANONICAL_OBJECT[intent.object_class])
    return " ".join(words)


def phrase_corpus() -> list[tuple[str, CommandIntent]]:
    """Every quoted command phrase plus systematic verb/object/deixis combos.

    Used by the test suite and the harness quick-phrase tooling; the first
    entries are the exact phrases the interaction protocol was demonstrated
    with, the remainder is generated from the canonical renderer.
    """
    corpus: list[tuple[str, CommandIntent]] = [
        ("place rod", CommandIntent(Verb.PLACE, ObjectClass.ROD)),
        ("go home", CommandIntent(Verb.GO_HOME, target=Target.HOME)),
        ("ok, go home", CommandIntent(Verb.GO_HOME, target=Target.HOME)),
        (
            "give me another rocker arm",
            CommandIntent(Verb.GIVE, ObjectClass.ROCKER_ARM, Deixis.ANOTHER, Target.HUMAN),
        ),
        ("pick up the last rod", CommandIntent(Verb.PICK, ObjectClass.ROD, Deixis.LAST)),
        ("pick rod", CommandIntent(Verb.PICK, ObjectClass.ROD)),
        (
            "give me this rod",
            CommandIntent(Verb.GIVE, ObjectClass.ROD, Deixis.THIS, Target.HUMAN),
        ),
        (
            "give me that rocker arm",
            CommandIntent(Verb.GIVE, ObjectClass.ROCKER_ARM, Deixis.THAT, Target.HUMAN),
        ),
        ("stop", CommandIntent(Verb.STOP)),
        ("pause", CommandIntent(Verb.PAUSE)),
        ("continue", CommandIntent(Verb.CONTINUE)),
    ]
    phrases = {p for p, _ in corpus}
    for verb in (Verb.PICK, Verb.PLACE, Verb.GIVE):
        for cls in (ObjectClass.ROD, ObjectClass.ROCKER_ARM):
            for deixis in Deixis:
                target = Target.HUMAN if verb is Verb.GIVE else Target.NONE
                intent = CommandIntent(verb, cls, deixis, target)
                phrase = render_phrase(intent)
                if phrase not in phrases:
                    phrases.add(phrase)
                    corpus.append((phrase, intent))
    return corpus
