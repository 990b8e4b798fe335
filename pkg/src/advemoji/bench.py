"""Benchmark harness: dataset ingestion, top-k sweeps, metric reports.

Runs the attack across search-space configurations, aggregating attack
success rate, average query count, average per-sample time, and the
perturbation rate (which a healthy engine keeps at exactly zero; anything
else aborts the run as an engine bug, not a metric).
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .attack import AttackConfig, attack, perturbation_rate
from .errors import AttackError, DatasetError, OracleError
from .lexicon import EmojiLexicon, SENTIMENTS
from .oracles import Oracle, label_coarsening
from .policy import Policy, random_candidates, rank_candidates


@dataclass(frozen=True)
class Example:
    id: str
    text: str
    label: str


@dataclass
class ExampleRecord:
    config: str
    id: str
    skipped: bool
    success: bool = False
    queries: int = 0
    attack_time: float = 0.0
    pert_rate: float = 0.0
    prefix: str = ""
    suffix: str = ""
    flipped_label: str | None = None


@dataclass
class ConfigRow:
    dataset: str
    model: str
    size: str
    pert_rate: float
    asr_percent: float
    avg_time_seconds: float
    avg_queries: float
    attacked: int
    successes: int
    skipped: int
    baseline_queries: int
    timing_flagged: bool


@dataclass
class BenchmarkReport:
    dataset: str
    model: str
    seed: int
    complete: bool = True
    rows: list[ConfigRow] = field(default_factory=list)
    examples: list[ExampleRecord] = field(default_factory=list)

    def assert_monotone_asr(self) -> None:
        """ASR must be non-decreasing in top-k for nested candidate lists."""
        ks = [int(r.size.removeprefix("top")) for r in self.rows]
        order = np.argsort(ks)
        asrs = [self.rows[i].asr_percent for i in order]
        for a, b in zip(asrs, asrs[1:]):
            if b < a:
                raise AssertionError(
                    f"ASR decreased with larger top-k: {asrs} for k={sorted(ks)}")

    def to_json(self) -> str:
        payload = {
            "dataset": self.dataset,
            "model": self.model,
            "seed": self.seed,
            "complete": self.complete,
            "rows": [asdict(r) for r in self.rows],
            "examples": [asdict(e) for e in self.examples],
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2)


def load_dataset(path) -> tuple[list[Example], set[str]]:
    """Read a JSONL dataset of {"id", "text", "label"} records.

    Every malformed line is collected and reported together; duplicate ids
    and empty files are errors.
    """
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    examples: list[Example] = []
    bad: list[str] = []
    seen_ids: dict[str, int] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError:
            bad.append(f"line {lineno}: invalid JSON")
            continue
        if not isinstance(rec, dict):
            bad.append(f"line {lineno}: not an object")
            continue
        missing = [k for k in ("id", "text", "label") if k not in rec]
        if missing:
            bad.append(f"line {lineno}: missing {', '.join(missing)}")
            continue
        if not rec["text"]:
            bad.append(f"line {lineno}: empty text")
            continue
        rid = str(rec["id"])
        if rid in seen_ids:
            bad.append(f"line {lineno}: duplicate id {rid!r} "
                       f"(first at line {seen_ids[rid]})")
            continue
        seen_ids[rid] = lineno
        examples.append(Example(id=rid, text=rec["text"], label=str(rec["label"])))
    if bad:
        raise DatasetError("malformed dataset:\n  " + "\n  ".join(bad))
    if not examples:
        raise DatasetError(f"dataset {path} is empty")
    return examples, {e.label for e in examples}


def run_benchmark(dataset: list[Example], oracle: Oracle, policy: Policy,
                  configs: list[AttackConfig], seed: int, *,
                  lexicon: EmojiLexicon, dataset_name: str = "fixture",
                  sentiment_map: dict[str, str] | None = None,
                  candidate_source: str = "policy", jobs: int = 1,
                  clock=time.perf_counter) -> BenchmarkReport:
    """Attack every example under every config and aggregate Table-style rows.

    Examples the oracle already misclassifies are skipped and excluded from
    the ASR denominator. Candidate lists are deterministic given the seed,
    so rows for growing top-k are nested. Reported per-sample time is the
    attack time plus the per-class candidate generation cost amortized over
    that class's examples. Baseline queries (confirming the label of x) are
    tracked separately from attack queries.
    """
    if not configs:
        raise ValueError("no attack configs given")
    if candidate_source not in ("policy", "random"):
        raise ValueError("candidate_source must be 'policy' or 'random'")
    report = BenchmarkReport(dataset=dataset_name, model=oracle.name, seed=seed)

    def sentiment_of(label: str) -> str:
        if label in SENTIMENTS and sentiment_map is None:
            return label
        mapping = sentiment_map or {}
        return label_coarsening(label, mapping)

    for cfg in configs:
        size = f"top{cfg.top_k}"
        gen_time: dict[str, float] = {}
        candidates: dict[str, list] = {}
        class_count: dict[str, int] = {}
        for ex in dataset:
            s = sentiment_of(ex.label)
            class_count[s] = class_count.get(s, 0) + 1
            if s not in candidates:
                t0 = clock()
                if candidate_source == "policy":
                    candidates[s] = rank_candidates(policy, s, cfg.top_k, cfg)
                else:
                    rng = np.random.default_rng(
                        (seed, cfg.top_k, SENTIMENTS.index(s)))
                    candidates[s] = random_candidates(policy, s, cfg.top_k,
                                                      cfg, rng)
                gen_time[s] = clock() - t0

        records: list[ExampleRecord] = []
        baseline_queries = 0
        aborted = False

        def attack_one(ex: Example) -> ExampleRecord:
            base = oracle.classify(ex.text)
            if base.label != ex.label:
                return ExampleRecord(config=size, id=ex.id, skipped=True)
            s = sentiment_of(ex.label)
            result = attack(ex.text, ex.label, candidates[s], oracle, cfg,
                            lexicon=lexicon, x_sentiment=s, clock=clock)
            rate = 0.0
            if result.adversarial_text is not None:
                rate = perturbation_rate(ex.text, result.adversarial_text,
                                         lexicon)
                if rate != 0.0:
                    raise AssertionError(
                        f"engine produced perturbed text for {ex.id}: "
                        f"rate={rate}")
            return ExampleRecord(
                config=size, id=ex.id, skipped=False, success=result.success,
                queries=result.queries, attack_time=result.elapsed,
                pert_rate=rate,
                prefix=result.pair.prefix.surfaces(lexicon) if result.pair else "",
                suffix=result.pair.suffix.surfaces(lexicon) if result.pair else "",
                flipped_label=result.flipped_label)

        try:
            if jobs > 1:
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    records = list(pool.map(attack_one, dataset))
            else:
                for ex in dataset:
                    records.append(attack_one(ex))
        except (OracleError, AttackError):
            report.complete = False
            aborted = True
        baseline_queries = len(records)

        records.sort(key=lambda r: r.id)
        report.examples.extend(records)
        attacked = [r for r in records if not r.skipped]
        skipped = sum(1 for r in records if r.skipped)
        n = len(attacked)
        successes = sum(r.success for r in attacked)
        amortized = sum(gen_time.values())
        total_time = sum(r.attack_time for r in attacked) + amortized
        report.rows.append(ConfigRow(
            dataset=dataset_name, model=oracle.name, size=size,
            pert_rate=max((r.pert_rate for r in attacked), default=0.0),
            asr_percent=100.0 * successes / n if n else 0.0,
            avg_time_seconds=total_time / n if n else 0.0,
            avg_queries=sum(r.queries for r in attacked) / n if n else 0.0,
            attacked=n, successes=successes, skipped=skipped,
            baseline_queries=baseline_queries,
            timing_flagged=jobs > 1))
        if aborted:
            break
    return report


MARKDOWN_HEADER = ("| Dataset | Model | Size | Pert. Rate | ASR (%) | "
                   "Avg. Time (s) | Avg. Query |")


def _markdown(report: BenchmarkReport) -> str:
    lines = [MARKDOWN_HEADER,
             "|" + "---|" * 7]
    for r in report.rows:
        lines.append(
            f"| {r.dataset} | {r.model} | {r.size} | {r.pert_rate:g} | "
            f"{r.asr_percent:.2f} | {r.avg_time_seconds:.3f} | "
            f"{r.avg_queries:.2f} |")
    if not report.complete:
        lines.append("")
        lines.append("**Note:** run aborted early; report is partial.")
    return "\n".join(lines) + "\n"


def _csv(report: BenchmarkReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset", "model", "size", "pert_rate", "asr_percent",
                "avg_time_seconds", "avg_queries"])
    for r in report.rows:
        w.writerow([r.dataset, r.model, r.size, f"{r.pert_rate:g}",
                    f"{r.asr_percent:.2f}", f"{r.avg_time_seconds:.3f}",
                    f"{r.avg_queries:.2f}"])
    return buf.getvalue()


def emit_report(report: BenchmarkReport, fmt: str, path) -> None:
    """Write the report as markdown, csv, or json (byte-stable per content)."""
    if not report.rows:
        raise ValueError("report has no rows")
    if fmt == "markdown":
        content = _markdown(report)
    elif fmt == "csv":
        content = _csv(report)
    elif fmt == "json":
        content = report.to_json() + "\n"
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w", encoding="utf-8") as f:
        f.write(content)
