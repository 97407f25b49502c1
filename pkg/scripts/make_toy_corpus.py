"""Build the bundled toy corpus: a 20-entity knowledge base, a 30-mention
corpus, and a mock-provider knowledge table.

Ten mentions are deliberately ambiguous: their contexts share no content
token with any candidate description (so overlap linking ties and picks the
wrong sibling), while the knowledge table gives the mock provider a
discriminative fact for each. The rest are informative contexts the linker
gets right on its own, plus one NIL mention.

Run from the repository root:  python3 scripts/make_toy_corpus.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from llmael.core import NIL_ID, Dataset, Entity, KnowledgeBase, MentionContext, validate_dataset
from llmael.io import save_dataset, save_kb
from llmael.linker import baseline_link, tokenize
from llmael.fusion import passthrough

OUT_DIR = Path(__file__).resolve().parent.parent / "data" / "toy"

WIKI = "https://example.org/wiki/"

ENTITIES = [
    ("paris-france", "Paris", ["Paris"], "capital city, France, Seine riverbank, Louvre museum, Eiffel landmark", "Paris", 3e-3),
    ("paris-texas", "Paris (Texas)", ["Paris"], "Texas town, Lamar County seat, cowboy replica Eiffel tower", "Paris,_Texas", 2e-6),
    ("springfield-illinois", "Springfield (Illinois)", ["Springfield"], "capital city, Illinois prairie, Sangamon riverbank, Lincoln home", "Springfield,_Illinois", 4e-5),
    ("springfield-vermont", "Springfield (Vermont)", ["Springfield"], "Vermont machine tool town, Windsor County, precision workshops", "Springfield,_Vermont", 3e-7),
    ("mercury-planet", "Mercury (planet)", ["Mercury"], "smallest planet, innermost solar orbit, cratered surface", "Mercury_(planet)", 8e-4),
    ("mercury-element", "Mercury (element)", ["Mercury", "quicksilver"], "silvery liquid metal, quicksilver, thermometer filler", "Mercury_(element)", 6e-5),
    ("jaguar-animal", "Jaguar", ["Jaguar"], "large spotted wild cat, rainforest predator, Americas", "Jaguar", 9e-5),
    ("jaguar-cars", "Jaguar Cars", ["Jaguar"], "British luxury car maker, Coventry factory, sleek saloons", "Jaguar_Cars", 5e-6),
    ("phoenix-arizona", "Phoenix (Arizona)", ["Phoenix"], "Arizona capital city, Sonoran desert sprawl, Valley sun", "Phoenix,_Arizona", 2e-4),
    ("phoenix-myth", "Phoenix (mythology)", ["Phoenix"], "immortal firebird, Greek legend, ash rebirth", "Phoenix_(mythology)", 7e-6),
    ("amazon-company", "Amazon (company)", ["Amazon"], "Seattle retail giant, cloud computing, online marketplace", "Amazon_(company)", 1e-3),
    ("amazon-river", "Amazon River", ["Amazon"], "South American waterway, rainforest basin, vast discharge", "Amazon_River", 6e-4),
    ("victoria-queen", "Queen Victoria", ["Victoria"], "nineteenth century British monarch, long reign, empress title", "Queen_Victoria", 4e-4),
    ("victoria-australia", "Victoria (Australia)", ["Victoria"], "southeastern Australian state, Melbourne capital, Yarra basin", "Victoria_(Australia)", 9e-6),
    ("delta-airline", "Delta Air Lines", ["Delta"], "Atlanta airline, major carrier, wide network", "Delta_Air_Lines", 3e-5),
    ("delta-river", "River delta", ["Delta", "delta"], "river mouth landform, sediment fan, branching channels", "River_delta", 8e-7),
    ("lincoln-president", "Abraham Lincoln", ["Lincoln"], "sixteenth United States president, emancipation proclamation, log cabin", "Abraham_Lincoln", 2e-3),
    ("lincoln-nebraska", "Lincoln (Nebraska)", ["Lincoln"], "Nebraska capital city, prairie plains, state university", "Lincoln,_Nebraska", 1e-5),
    ("titan-moon", "Titan (moon)", ["Titan"], "largest Saturn moon, thick orange haze, methane lakes", "Titan_(moon)", 5e-5),
    ("titan-myth", "Titan (mythology)", ["Titan"], "elder Greek deity, primordial giant, Olympian predecessor", "Titan_(mythology)", 4e-7),
]

# (doc_id, context, surface, occurrence, gold)
MENTIONS = [
    # Ambiguous: uninformative context, cue word carries the discriminating fact.
    ("amb-01", "Velt Morran spoke about Paris during breakfast.", "Paris", 1, "paris-texas"),
    ("amb-02", "Korval Dane photographed Springfield without comment.", "Springfield", 1, "springfield-vermont"),
    ("amb-03", "Dilvow Kresh mentioned Mercury twice yesterday.", "Mercury", 1, "mercury-planet"),
    ("amb-04", "Quorast Bilm sketched a Jaguar last spring.", "Jaguar", 1, "jaguar-cars"),
    ("amb-05", "Fenwick Olte praised Phoenix repeatedly.", "Phoenix", 1, "phoenix-myth"),
    ("amb-06", "Grell Vanto toured Victoria hurriedly.", "Victoria", 1, "victoria-queen"),
    ("amb-07", "Osmix Tarn studied a delta quietly.", "delta", 1, "delta-river"),
    ("amb-08", "Hulbert Craz counted Titan slowly.", "Titan", 1, "titan-myth"),
    ("amb-09", "Wrenfold Azzi greeted Lincoln warmly.", "Lincoln", 1, "lincoln-president"),
    ("amb-10", "Jastrow Pell quoted Amazon cheerfully.", "Amazon", 1, "amazon-river"),
    # Informative: the context itself selects the right entity.
    ("doc-01", "Paris opened the Louvre museum while the capital city crowds lined the Seine riverbank. Tourists loved Paris.", "Paris", 1, "paris-france"),
    ("doc-01", "Paris opened the Louvre museum while the capital city crowds lined the Seine riverbank. Tourists loved Paris.", "Paris", 2, "paris-france"),
    ("doc-02", "Cowboys gathered in Paris near the replica Eiffel tower with a cowboy hat, deep in Lamar County, Texas.", "Paris", 1, "paris-texas"),
    ("doc-03", "Springfield lawmakers met near the Sangamon riverbank in Illinois.", "Springfield", 1, "springfield-illinois"),
    ("doc-04", "Machine tool makers of Windsor County kept Springfield workshops busy in Vermont.", "Springfield", 1, "springfield-vermont"),
    ("doc-05", "Astronomers mapped Mercury along its innermost solar orbit, a cratered surface world.", "Mercury", 1, "mercury-planet"),
    ("doc-06", "Chemists poured Mercury, the silvery liquid metal once called quicksilver, into a thermometer.", "Mercury", 1, "mercury-element"),
    ("doc-07", "A large spotted wild cat, the Jaguar stalked through the rainforest.", "Jaguar", 1, "jaguar-animal"),
    ("doc-08", "The Coventry factory rolled out another Jaguar, a sleek luxury car.", "Jaguar", 1, "jaguar-cars"),
    ("doc-09", "Phoenix sprawled across the Sonoran desert as the Arizona capital.", "Phoenix", 1, "phoenix-arizona"),
    ("doc-10", "Out of the ashes rose the Phoenix, the immortal firebird of Greek legend.", "Phoenix", 1, "phoenix-myth"),
    ("doc-11", "Shoppers praised Amazon for its online marketplace and cloud computing muscle from Seattle.", "Amazon", 1, "amazon-company"),
    ("doc-12", "The Amazon carried rainforest silt across its vast basin, a South American waterway.", "Amazon", 1, "amazon-river"),
    ("doc-13", "Queen Victoria ruled as British monarch through the nineteenth century.", "Victoria", 1, "victoria-queen"),
    ("doc-14", "Melbourne stayed the capital of Victoria, the southeastern Australian state.", "Victoria", 1, "victoria-australia"),
    ("doc-15", "Delta announced new routes as the Atlanta airline grew its wide network.", "Delta", 1, "delta-airline"),
    ("doc-16", "The river split into a branching delta, a sediment fan at its mouth.", "delta", 1, "delta-river"),
    ("doc-17", "Lincoln signed the emancipation proclamation as sixteenth president of the United States.", "Lincoln", 1, "lincoln-president"),
    ("doc-18", "Students filled the state university as Lincoln grew across the Nebraska prairie plains.", "Lincoln", 1, "lincoln-nebraska"),
    # NIL: no knowledge-base entity carries this surface.
    ("doc-20", "Nobody could locate Gondor on any map.", "Gondor", 1, NIL_ID),
]

KNOWLEDGE = {
    "velt morran": "Paris means Lamar County seat, cowboy town, Texas.",
    "korval dane": "Springfield sits within Windsor County, Vermont machine tool town.",
    "dilvow kresh": "Mercury denotes that smallest planet, innermost solar orbit.",
    "quorast bilm": "Jaguar names that British luxury car maker, Coventry factory.",
    "fenwick olte": "Phoenix evokes that immortal firebird, Greek legend, ash rebirth.",
    "grell vanto": "Victoria signifies that nineteenth century British monarch, empress title.",
    "osmix tarn": "Delta describes that river mouth landform, sediment fan.",
    "hulbert craz": "Titan recalls that elder Greek deity, primordial giant.",
    "wrenfold azzi": "Lincoln denotes that sixteenth United States president, emancipation proclamation.",
    "jastrow pell": "Amazon signals that South American waterway, rainforest basin.",
}

CONFIG = """\
kb: kb.jsonl
datasets:
  - name: toy
    path: corpus.jsonl
provider:
  kind: mock
  model: echo-1
  knowledge: mock_knowledge.json
params:
  max_tokens: 150
  temperature: 0.01
strategy: 4
backend:
  kind: baseline
top_k: 10
out: out
"""


def nth_occurrence(text: str, needle: str, n: int) -> int:
    pos = -1
    for _ in range(n):
        pos = text.index(needle, pos + 1)
    return pos


def build() -> tuple[KnowledgeBase, Dataset]:
    kb = KnowledgeBase(
        Entity(id=i, title=t, aliases=tuple(a), description=d, url=WIKI + u, pagerank=p)
        for i, t, a, d, u, p in ENTITIES
    )
    records = []
    for doc_id, context, surface, occurrence, gold in MENTIONS:
        start = nth_occurrence(context, surface, occurrence)
        records.append(
            MentionContext(
                doc_id=doc_id,
                context=context,
                start=start,
                length=len(surface),
                surface=surface,
                gold_entity_id=gold,
            )
        )
    return kb, Dataset("toy", tuple(records))


def check(kb: KnowledgeBase, dataset: Dataset) -> None:
    """Fail fast if the corpus stops exercising what the tests rely on."""
    report = validate_dataset(dataset)
    assert report.ok, report.violations
    assert len(dataset) == 30
    assert len(kb) == 20

    ambiguous = [r for r in dataset if r.doc_id.startswith("amb-")]
    assert len(ambiguous) >= 5
    description_tokens = {
        token for entity in kb.entities.values() for token in tokenize(entity.description)
    }
    for record in ambiguous:
        candidates = kb.lookup(record.surface)
        assert len(candidates) >= 2, record.doc_id
        context_tokens = set(tokenize(record.context)) - set(tokenize(record.surface))
        assert not context_tokens & description_tokens, (record.doc_id, context_tokens & description_tokens)
        # overlap linking on the bare context must miss the gold entity
        top = baseline_link(kb, passthrough(record)).candidates[0][0]
        assert top != record.gold_entity_id, record.doc_id
        # and the knowledge table must carry a fact that selects it
        cues = [c for c in KNOWLEDGE if c in record.context.lower()]
        assert len(cues) == 1, record.doc_id
        fact_tokens = set(tokenize(KNOWLEDGE[cues[0]]))
        gold_desc = set(tokenize(kb.entities[record.gold_entity_id].description))
        assert fact_tokens & gold_desc, record.doc_id
        for sibling in candidates:
            if sibling.id != record.gold_entity_id:
                assert not fact_tokens & set(tokenize(sibling.description)), record.doc_id

    informative = [r for r in dataset if r.doc_id.startswith("doc-") and not r.is_nil]
    for record in informative:
        top = baseline_link(kb, passthrough(record)).candidates[0][0]
        assert top == record.gold_entity_id, record.doc_id

    nil_records = [r for r in dataset if r.is_nil]
    assert len(nil_records) == 1
    assert not kb.lookup(nil_records[0].surface)


def main() -> int:
    kb, dataset = build()
    check(kb, dataset)
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    save_kb(kb, OUT_DIR / "kb.jsonl")
    save_dataset(dataset, OUT_DIR / "corpus.jsonl")
    (OUT_DIR / "mock_knowledge.json").write_text(
        json.dumps(KNOWLEDGE, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (OUT_DIR / "config.yaml").write_text(CONFIG, encoding="utf-8")
    print(f"wrote toy corpus to {OUT_DIR}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
