"""Rule-based entity recognizer.

Finds dates, times, phone numbers and frequencies with a regex grammar that
ships as a versioned rules file, and substitutes placeholder tags for the
matched surfaces. Person names and free task text are captured only when the
caller says the dialogue expects them (a slot prompt asked for that type),
since there is no open-vocabulary NER here.

Relative dates resolve against an injected reference date, never the real
system clock. A couple of transliterated Hindi words (kal, subah, raat) are
covered as a stand-in for real code-mix handling; this is not
production-grade multilingual support.
"""

from __future__ import annotations

import re
from datetime import date, timedelta
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable

from .types import EntitySet, EntitySpan, EntityType, merge_into

# Fixed fallback reference date; keeps extraction deterministic when the
# caller injects no clock.
DEFAULT_REFERENCE_DATE = date(2017, 4, 1)

MONTHS = "jan feb mar apr may jun jul aug sep oct nov dec".split()
WEEKDAYS = "monday tuesday wednesday thursday friday saturday sunday".split()
_WEEKDAY_PREFIXES = {
    "mon": "monday", "tue": "tuesday", "tues": "tuesday", "wed": "wednesday",
    "wednes": "wednesday", "thu": "thursday", "thur": "thursday",
    "thurs": "thursday", "fri": "friday", "sat": "saturday",
    "satur": "saturday", "sun": "sunday",
}

_NAME_LEADIN = re.compile(
    r"(?:my name is|i am|i'm|im|this is|call me)\s+([a-z]+(?:\s+[a-z]+)?)",
    re.IGNORECASE,
)
_TASK_LEADIN = re.compile(
    r"^(?:please\s+|plz\s+)?(?:set\s+a\s+reminder\s+|remind\s+me\s+|reminder\s+)?(?:to\s+|for\s+|about\s+)?",
    re.IGNORECASE,
)
_TASK_TRAILING = {"at", "on", "by", "in", "every", "for", "the", "a", "an", "and"}


class RuleError(Exception):
    """Raised for a malformed rules file."""


def _minutes(hour: int, minute: int, meridiem: str | None) -> int:
    if meridiem:
        m = meridiem.lower().lstrip()
        hour = hour % 12
        if m.startswith("p"):
            hour += 12
    return (hour % 24) * 60 + minute


def _next_occurrence(day: int, month: int, year: int | None, today: date) -> date:
    if year is not None:
        if year < 100:
            year += 2000
        return date(year, month, day)
    candidate = date(today.year, month, day)
    if candidate < today:
        candidate = date(today.year + 1, month, day)
    return candidate


def resolve_date_value(value: str, today: date) -> date:
    """Resolve a normalized date value (ISO or relative marker) to a date."""
    if value in ("today", "tonight"):
        return today
    if value == "tomorrow":
        return today + timedelta(days=1)
    if value.startswith("weekday:"):
        target = WEEKDAYS.index(value.split(":", 1)[1])
        return today + timedelta(days=(target - today.weekday()) % 7)
    return date.fromisoformat(value)


def format_time(minutes: int) -> str:
    """Render minutes-from-midnight on a 12-hour clock, e.g. 840 -> 2:00 PM."""
    if not 0 <= minutes < 1440:
        raise ValueError(f"minutes out of range: {minutes}")
    hour, minute = divmod(minutes, 60)
    suffix = "AM" if hour < 12 else "PM"
    hour12 = hour % 12 or 12
    return f"{hour12}:{minute:02d} {suffix}"


def format_date(value: str, today: date | None = None) -> str:
    """Human-readable date for response templates, e.g. Tue, 18 April."""
    if value in ("today", "tomorrow", "tonight") or value.startswith("weekday:"):
        if today is None:
            return value.split(":", 1)[-1]
        value = resolve_date_value(value, today).isoformat()
    d = date.fromisoformat(value)
    return f"{d:%a}, {d.day} {d:%B}"


class _Rule:
    __slots__ = ("entity_type", "pattern", "recipe", "arg", "index")

    def __init__(self, entity_type: EntityType, pattern: str, recipe: str, index: int):
        self.entity_type = entity_type
        self.pattern = re.compile(pattern, re.IGNORECASE)
        if ":" in recipe:
            self.recipe, self.arg = recipe.split(":", 1)
        else:
            self.recipe, self.arg = recipe, None
        self.index = index


class EntityRecognizer:
    """Compiled pattern grammar; immutable after construction."""

    def __init__(self, rules_path: str | Path | None = None, today: date | None = None):
        self.today = today or DEFAULT_REFERENCE_DATE
        text = (
            Path(rules_path).read_text(encoding="utf-8")
            if rules_path is not None
            else resources.files("reminderbot.data").joinpath("entity_rules.txt").read_text("utf-8")
        )
        self.rules = self._parse_rules(text)
        self._recipes: dict[str, Callable] = {
            "time_hm_ampm": self._time_hm_ampm,
            "time_h_ampm": self._time_h_ampm,
            "time_24h": self._time_24h,
            "time_const": self._const_int,
            "date_day_month": self._date_day_month,
            "date_month_day": self._date_month_day,
            "date_numeric": self._date_numeric,
            "date_marker": self._const_str,
            "date_weekday": self._date_weekday,
            "phone_digits": self._phone_digits,
            "phone_plus": self._phone_plus,
            "freq_const": self._const_str,
            "freq_hourly_n": self._freq_hourly_n,
            "name_assistant": self._name,
            "name_user": self._name,
        }
        unknown = {r.recipe for r in self.rules} - set(self._recipes)
        if unknown:
            raise RuleError(f"unknown normalization recipes: {sorted(unknown)}")

    @staticmethod
    def _parse_rules(text: str) -> list[_Rule]:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("# entity-rules"):
            raise RuleError("rules file must start with a '# entity-rules v<N>' header")
        rules = []
        for i, line in enumerate(lines):
            if line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise RuleError(f"rule line {i + 1} needs 3 tab-separated fields: {line!r}")
            try:
                etype = EntityType(parts[0].strip())
            except ValueError as exc:
                raise RuleError(f"rule line {i + 1}: unknown entity type {parts[0]!r}") from exc
            rules.append(_Rule(etype, parts[1], parts[2].strip(), len(rules)))
        return rules

    # --- normalization recipes ------------------------------------------

    def _time_hm_ampm(self, m: re.Match, rule: _Rule, today: date):
        return _minutes(int(m.group(1)), int(m.group(2)), m.group(3))

    def _time_h_ampm(self, m: re.Match, rule: _Rule, today: date):
        return _minutes(int(m.group(1)), 0, m.group(2))

    def _time_24h(self, m: re.Match, rule: _Rule, today: date):
        return _minutes(int(m.group(1)), int(m.group(2)), None)

    def _const_int(self, m: re.Match, rule: _Rule, today: date):
        return int(rule.arg)

    def _const_str(self, m: re.Match, rule: _Rule, today: date):
        return rule.arg

    def _date_day_month(self, m: re.Match, rule: _Rule, today: date):
        day = int(m.group(2))
        month = MONTHS.index(m.group(3).lower()[:3]) + 1
        year = int(m.group(4)) if m.group(4) else None
        return _next_occurrence(day, month, year, today).isoformat()

    def _date_month_day(self, m: re.Match, rule: _Rule, today: date):
        month = MONTHS.index(m.group(1).lower()[:3]) + 1
        day = int(m.group(2))
        return _next_occurrence(day, month, None, today).isoformat()

    def _date_numeric(self, m: re.Match, rule: _Rule, today: date):
        day, month = int(m.group(1)), int(m.group(2))
        year = int(m.group(3)) if m.group(3) else None
        return _next_occurrence(day, month, year, today).isoformat()

    def _date_weekday(self, m: re.Match, rule: _Rule, today: date):
        return "weekday:" + _WEEKDAY_PREFIXES[m.group(1).lower()]

    def _phone_digits(self, m: re.Match, rule: _Rule, today: date):
        return m.group(1)

    def _phone_plus(self, m: re.Match, rule: _Rule, today: date):
        return m.group(1) + m.group(2)

    def _freq_hourly_n(self, m: re.Match, rule: _Rule, today: date):
        return f"hourly:{int(m.group(1))}"

    def _name(self, m: re.Match, rule: _Rule, today: date):
        return m.group(1).lower()

    # --- extraction ------------------------------------------------------

    def extract(
        self,
        text: str,
        expected: Iterable[EntityType] | None = None,
        today: date | None = None,
    ) -> list[EntitySpan]:
        """Non-overlapping spans sorted by start; longest match wins.

        ``expected`` gates the context-dependent types: person_name capture
        from free text and task_text capture happen only when listed.
        """
        if not text:
            return []
        today = today or self.today
        expected_set = set(expected) if expected else set()
        candidates: list[EntitySpan] = []
        for rule in self.rules:
            for m in rule.pattern.finditer(text):
                try:
                    value = self._recipes[rule.recipe](m, rule, today)
                except ValueError:
                    continue  # e.g. 31/2: pattern hit, no such date
                role = "assistant" if rule.recipe == "name_assistant" else "user"
                candidates.append(
                    EntitySpan(rule.entity_type, m.group(0), m.start(), m.end(), value, role)
                )
        spans = self._resolve_overlaps(candidates)
        if EntityType.PERSON_NAME in expected_set:
            name_span = self._capture_name(text, spans)
            if name_span is not None:
                spans = self._resolve_overlaps(spans + [name_span])
        if EntityType.TASK_TEXT in expected_set:
            task_span = self._capture_task(text, spans)
            if task_span is not None:
                spans.append(task_span)
        spans.sort(key=lambda s: s.start)
        return spans

    @staticmethod
    def _resolve_overlaps(candidates: list[EntitySpan]) -> list[EntitySpan]:
        # Leftmost-longest, deterministic: order by start, then longer first.
        candidates = sorted(candidates, key=lambda s: (s.start, -(s.end - s.start)))
        kept: list[EntitySpan] = []
        for span in candidates:
            if all(not span.overlaps(k) for k in kept):
                kept.append(span)
        kept.sort(key=lambda s: s.start)
        return kept

    def _capture_name(self, text: str, spans: list[EntitySpan]) -> EntitySpan | None:
        m = _NAME_LEADIN.search(text)
        if m:
            return EntitySpan(
                EntityType.PERSON_NAME, m.group(1), m.start(1), m.end(1), m.group(1).lower()
            )
        if spans:
            return None
        stripped = text.strip()
        words = stripped.split()
        if 1 <= len(words) <= 2 and all(w.isalpha() for w in words):
            start = text.index(stripped)
            return EntitySpan(
                EntityType.PERSON_NAME, stripped, start, start + len(stripped), stripped.lower()
            )
        return None

    def _capture_task(self, text: str, spans: list[EntitySpan]) -> EntitySpan | None:
        # First stretch of the text not claimed by another entity.
        cut = min((s.start for s in spans), default=len(text))
        segment = text[:cut]
        m = _TASK_LEADIN.match(segment)
        begin = m.end() if m else 0
        words: list[tuple[int, str]] = []
        for wm in re.finditer(r"\S+", segment[begin:]):
            words.append((begin + wm.start(), wm.group(0)))
        while words and words[-1][1].lower().strip(".,!?") in _TASK_TRAILING:
            words.pop()
        if not words:
            return None
        start = words[0][0]
        end = words[-1][0] + len(words[-1][1])
        surface = text[start:end]
        value = re.sub(r"[^a-z0-9 ]", "", surface.lower())
        value = " ".join(value.split())
        if not value:
            return None
        return EntitySpan(EntityType.TASK_TEXT, surface, start, end, value)

    def replace_with_tags(
        self,
        text: str,
        expected: Iterable[EntityType] | None = None,
        today: date | None = None,
    ) -> tuple[str, list[EntitySpan]]:
        """Substitute placeholder tags for entity surfaces.

        Replacement runs right to left so earlier offsets stay valid. The
        returned spans describe the original text.
        """
        spans = self.extract(text, expected=expected, today=today)
        tagged = text
        for span in reversed(spans):
            tagged = tagged[: span.start] + span.tag + tagged[span.end :]
        return tagged, spans


__all__ = [
    "DEFAULT_REFERENCE_DATE",
    "EntityRecognizer",
    "RuleError",
    "EntitySet",
    "EntitySpan",
    "EntityType",
    "format_date",
    "format_time",
    "merge_into",
    "resolve_date_value",
]
