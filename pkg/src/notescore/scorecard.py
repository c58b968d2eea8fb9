"""DeepScore composite and Note Quality Scorecard rendering.

Component values are stored as fractions in [0, 1]; percentages exist only
for display. Display rounding is half-up to one decimal, applied to the
shortest decimal representation of the stored value so ``0.959`` shows as
``95.9%`` rather than falling victim to binary floating point.
"""

from __future__ import annotations

import html
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import MissingComponent, OutOfRange, UnsupportedFormat

SCHEMA_VERSION = 1

COMPONENT_NAMES = ("mdfr", "cdfr", "cer", "aer", "mnr", "mwhr")

CATEGORIES = {
    "mdfr": "Stat Rates",
    "cdfr": "Stat Rates",
    "cer": "Recall/Precision",
    "aer": "Recall/Precision",
    "mnr": "User Acceptance",
    "mwhr": "Transcription QC",
    "deep_score": "Composite",
}

LABELS = {
    "mdfr": "MDFR",
    "cdfr": "CDFR",
    "cer": "CER",
    "aer": "AER",
    "mnr": "MNR",
    "mwhr": "MWHR",
    "deep_score": "DeepScore",
}

FORMATS = ("table", "json", "html")


def round_half_up_tenths(value) -> Fraction:
    """Percent value of fraction ``value`` rounded half-up to one decimal."""
    frac = value if isinstance(value, Fraction) else Fraction(repr(float(value)))
    return Fraction(math.floor(frac * 1000 + Fraction(1, 2)), 10)


def display_percent(value) -> Optional[str]:
    if value is None:
        return None
    tenths = round_half_up_tenths(value) * 10
    whole, rest = divmod(int(tenths), 10)
    return f"{whole}.{rest}%"


@dataclass(frozen=True)
class Component:
    name: str
    value: float
    source: str = ""
    n: Optional[int] = None

    def __post_init__(self):
        if self.name not in COMPONENT_NAMES:
            raise ValueError(f"unknown component {self.name!r}")
        v = float(self.value)
        if not 0.0 <= v <= 1.0:
            raise OutOfRange(f"{self.name} must be a fraction in [0, 1], got {self.value}")
        object.__setattr__(self, "value", v)

    @property
    def percent(self) -> float:
        return self.value * 100

    @property
    def display(self) -> str:
        return display_percent(self.value)

    @property
    def category(self) -> str:
        return CATEGORIES[self.name]


@dataclass(frozen=True)
class ComponentMetrics:
    mdfr: Optional[Component] = None
    cdfr: Optional[Component] = None
    cer: Optional[Component] = None
    aer: Optional[Component] = None
    mnr: Optional[Component] = None
    mwhr: Optional[Component] = None

    @classmethod
    def from_percentages(cls, mdfr, cdfr, cer, aer, mnr, mwhr, source="", n=None):
        vals = dict(mdfr=mdfr, cdfr=cdfr, cer=cer, aer=aer, mnr=mnr, mwhr=mwhr)
        return cls(**{
            k: Component(k, v / 100, source, n) for k, v in vals.items()
        })

    def items(self):
        return [(name, getattr(self, name)) for name in COMPONENT_NAMES]

    def missing(self) -> list[str]:
        return [name for name, c in self.items() if c is None]

    @property
    def complete(self) -> bool:
        return not self.missing()


@dataclass(frozen=True)
class DeepScore:
    value: float
    components: ComponentMetrics

    @property
    def percent(self) -> float:
        return self.value * 100

    @property
    def display(self) -> str:
        return display_percent(self.value)


def compute_deepscore(m: ComponentMetrics) -> DeepScore:
    """Unweighted mean of the six components."""
    missing = m.missing()
    if missing:
        raise MissingComponent(f"DeepScore needs all six components; missing {', '.join(missing)}")
    vals = [c.value for _, c in m.items()]
    mean = math.fsum(vals) / len(vals)
    # guard the min <= mean <= max bound against last-ulp rounding
    mean = min(max(mean, min(vals)), max(vals))
    return DeepScore(mean, m)


@dataclass(frozen=True)
class Scorecard:
    components: ComponentMetrics
    deep_score: Optional[DeepScore] = None
    run_label: str = ""
    date: str = ""
    deep_score_source: str = ""
    warnings: tuple[str, ...] = ()
    details: dict = field(default_factory=dict, compare=False)

    @classmethod
    def build(cls, components: ComponentMetrics, **kw) -> "Scorecard":
        ds = compute_deepscore(components) if components.complete else None
        return cls(components, ds, **kw)


def _as_card(obj) -> Scorecard:
    if isinstance(obj, Scorecard):
        return obj
    if isinstance(obj, DeepScore):
        return Scorecard(obj.components, obj)
    raise TypeError(f"cannot render {type(obj).__name__}")


def to_dict(card: Scorecard) -> dict:
    comps = []
    for name, c in card.components.items():
        comps.append({
            "name": name,
            "value": None if c is None else c.value,
            "display": None if c is None else c.display,
            "category": CATEGORIES[name],
            "source": None if c is None else c.source,
            "n": None if c is None else c.n,
        })
    ds = None
    if card.deep_score is not None:
        ds = {
            "value": card.deep_score.value,
            "display": card.deep_score.display,
            "category": CATEGORIES["deep_score"],
            "source": card.deep_score_source,
        }
    return {
        "schema_version": SCHEMA_VERSION,
        "run_label": card.run_label,
        "date": card.date,
        "deep_score": ds,
        "components": comps,
        "warnings": list(card.warnings),
        "details": card.details,
    }


def from_dict(doc: dict) -> Scorecard:
    comps = {}
    for row in doc["components"]:
        if row["value"] is not None:
            comps[row["name"]] = Component(row["name"], row["value"], row.get("source") or "", row.get("n"))
    metrics = ComponentMetrics(**comps)
    ds = None
    ds_source = ""
    if doc.get("deep_score") is not None:
        ds = DeepScore(float(doc["deep_score"]["value"]), metrics)
        ds_source = doc["deep_score"].get("source") or ""
    return Scorecard(
        components=metrics,
        deep_score=ds,
        run_label=doc.get("run_label", ""),
        date=doc.get("date", ""),
        deep_score_source=ds_source,
        warnings=tuple(doc.get("warnings", ())),
        details=doc.get("details", {}),
    )


def parse_scorecard(text: str) -> Scorecard:
    return from_dict(json.loads(text))


def _rows(card: Scorecard):
    rows = []
    for name, c in card.components.items():
        if c is None:
            rows.append((LABELS[name], "n/a", CATEGORIES[name], "", ""))
        else:
            rows.append((LABELS[name], c.display, c.category, c.source, "" if c.n is None else str(c.n)))
    ds = card.deep_score
    rows.append((
        LABELS["deep_score"],
        "n/a" if ds is None else ds.display,
        CATEGORIES["deep_score"],
        card.deep_score_source,
        "",
    ))
    return rows


HEADER = ("Metric", "Value", "Category", "Source", "n")


def _render_table(card: Scorecard) -> str:
    rows = _rows(card)
    widths = [max(len(r[i]) for r in rows + [HEADER]) for i in range(len(HEADER))]

    def fmt(r):
        cells = [r[0].rjust(widths[0])] + [r[i].ljust(widths[i]) for i in range(1, len(r))]
        return "  ".join(cells).rstrip()

    rule = "-" * len(fmt(tuple("-" * w for w in widths)))
    lines = []
    if card.run_label or card.date:
        lines.append(" ".join(x for x in ("Note Quality Scorecard", card.run_label, card.date) if x))
    lines += [rule, fmt(HEADER), rule]
    lines += [fmt(r) for r in rows[:-1]]
    lines += [rule, fmt(rows[-1]), rule]
    lines += [f"warning: {w}" for w in card.warnings]
    return "\n".join(lines) + "\n"


def _render_html(card: Scorecard) -> str:
    esc = html.escape
    out = ["<table class=\"scorecard\">"]
    if card.run_label or card.date:
        out.append(f"  <caption>{esc(' '.join(x for x in ('Note Quality Scorecard', card.run_label, card.date) if x))}</caption>")
    out.append("  <thead><tr>" + "".join(f"<th>{h}</th>" for h in HEADER) + "</tr></thead>")
    out.append("  <tbody>")
    for r in _rows(card):
        out.append("    <tr>" + "".join(f"<td>{esc(x)}</td>" for x in r) + "</tr>")
    out.append("  </tbody>")
    out.append("</table>")
    return "\n".join(out) + "\n"


def render_json(card: Scorecard) -> str:
    return json.dumps(to_dict(card), indent=2, ensure_ascii=False) + "\n"


def render_scorecard(d, format: str = "table") -> str:
    """Render a :class:`DeepScore` or (possibly partial) :class:`Scorecard`
    as ``table``, ``json`` or ``html``."""
    card = _as_card(d)
    if format == "table":
        return _render_table(card)
    if format == "json":
        return render_json(card)
    if format == "html":
        return _render_html(card)
    raise UnsupportedFormat(f"unsupported format {format!r}; choose from {', '.join(FORMATS)}")


def compare_reported(card: Scorecard, reported: dict) -> list[str]:
    """List metrics whose displayed value differs from a reported percentage.

    ``reported`` maps metric names (``mdfr`` ... ``deep_score``) to the
    one-decimal percentages a report printed.
    """
    flagged = []
    for name, pct in reported.items():
        if name == "deep_score":
            ours = card.deep_score
        else:
            ours = getattr(card.components, name, None)
        if ours is None:
            continue
        got = display_percent(ours.value)
        want = display_percent(Fraction(str(pct)) / 100)
        if got != want:
            flagged.append(f"{LABELS.get(name, name)}: computed {got}, reported {want}")
    return flagged

