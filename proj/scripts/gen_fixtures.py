#!/usr/bin/env python3
"""Regenerates tests/fixtures.

The expected outputs are computed here, independently of the C++ code:
entity decoding comes from html.entities, stems from NLTK's Porter stemmer in
ORIGINAL_ALGORITHM mode, ids from a local FNV-1a. Requires nltk.

    python3 scripts/gen_fixtures.py
"""

import html.entities
import json
import random
import re
import sysconfig
from pathlib import Path

from nltk.stem.porter import PorterStemmer

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "tests" / "fixtures"

STOPWORDS = set("""
a about above after again against ain all am an and any are aren as at be because been before
being below between both but by can couldn d did didn do does doesn doing don down during each
few for from further had hadn has hasn have haven having he her here hers herself him himself his
how i if in into is isn it its itself just ll m ma me mightn more most mustn my myself needn no
nor not now o of off on once only or other our ours ourselves out over own re s same shan she
should shouldn so some such t than that the their theirs them themselves then there these they
this those through to too under until up ve very was wasn we were weren what when where which
while who whom why will with won wouldn y you your yours yourself yourselves
""".split())

STEMMER = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def paper_id(key: str) -> str:
    return "%016x" % fnv1a64(key.encode("utf-8"))


def canonical_line(rec: dict) -> str:
    """Serializes with the fixed key order, omitting absent optionals."""
    out = {"id": rec["id"], "title": rec["title"]}
    if rec.get("abstract") is not None:
        out["abstract"] = rec["abstract"]
    out["year"] = rec["year"]
    out["authors"] = rec.get("authors", [])
    for k in ("venue", "publisher"):
        if rec.get(k) is not None:
            out[k] = rec[k]
    out["paper_type"] = rec.get("paper_type", "other")
    out["fields_of_study"] = sorted(set(rec.get("fields_of_study", [])))
    out["access_type"] = rec.get("access_type", "unknown")
    if rec.get("url") is not None:
        out["url"] = rec["url"]
    out["in_citations"] = rec.get("in_citations", 0)
    out["out_citations"] = rec.get("out_citations", 0)
    return json.dumps(out, ensure_ascii=False, separators=(",", ":"))


# ---------------------------------------------------------------- XML dump

FIRST = ["Jürgen", "Zoë", "José", "Françoise", "Søren", "Ana", "Björn", "Chloé", "Łukasz",
         "Renée", "Niño", "Ole", "Maria", "Wei", "Priya", "Tomás", "Åsa", "Noël", "Kim", "Ève"]
LAST = ["Möller", "Núñez", "García", "Dvořák", "Øster", "Smith", "Ölçer", "Lefèvre", "Müller",
        "Zhang", "Kovač", "Sánchez", "Brontë", "Dubois", "Ærø", "Patel", "Gödel", "Jones"]
VENUES = ["ACL", "EMNLP", "SIGMOD Conference", "VLDB J.", "CoRR", "Inf. Process. Lett.",
          "Künstliche Intell.", "J. ACM", "NAACL-HLT", "Proc. VLDB Endow."]
PUBLISHERS = ["Springer", "ACM", "IEEE Computer Society", "Éditions Lavoisier", "MIT Press"]
WORDS = ["learning", "graphs", "neural", "parsing", "streaming", "queries", "indexing",
         "citation", "analysis", "topic", "models", "scholarly", "databases", "retrieval",
         "efficient", "scalable", "résumé", "naïve", "café", "Bayes", "systems"]
FIELDS = ["Computer Science", "Mathematics", "Linguistics", "Physics", "Medicine"]
KINDS = ["article", "inproceedings", "proceedings", "book", "incollection", "phdthesis",
         "mastersthesis", "www"]
TYPE_OF = {"article": "article", "inproceedings": "article", "proceedings": "proceedings",
           "book": "book", "incollection": "incollection", "phdthesis": "phdthesis",
           "mastersthesis": "mastersthesis", "www": "other"}

CHAR_TO_ENTITY = {chr(cp): name for name, cp in html.entities.name2codepoint.items()
                  if cp >= 0xC0 and cp <= 0x17F}


def xml_escape(text: str, use_entities: bool) -> str:
    out = []
    for ch in text:
        if ch == "&":
            out.append("&amp;")
        elif ch == "<":
            out.append("&lt;")
        elif ch == ">":
            out.append("&gt;")
        elif use_entities and ch in CHAR_TO_ENTITY:
            out.append("&" + CHAR_TO_ENTITY[ch] + ";")
        else:
            out.append(ch)
    return "".join(out)


def xml_fixture(rng: random.Random):
    parts = ['<?xml version="1.0" encoding="UTF-8"?>', '<!DOCTYPE dblp SYSTEM "dblp.dtd">', "<dblp>"]
    expected = []
    malformed_at = 57
    n = 120
    for i in range(n):
        kind = KINDS[i % len(KINDS)] if i % 11 else "article"
        key = f"{'journals' if kind == 'article' else 'conf'}/fx/Rec{i:03d}"
        ent = i % 3 != 0
        authors = [f"{rng.choice(FIRST)} {rng.choice(LAST)}" for _ in range(rng.randint(0, 4))]
        words = rng.sample(WORDS, rng.randint(2, 6))
        title = words[0].capitalize() + " " + " ".join(words[1:])
        if i % 9 == 0:
            title += " & friends"
        year = rng.randint(1970, 2023)
        rec = {"id": paper_id(key), "title": title, "year": year, "authors": authors,
               "paper_type": TYPE_OF[kind]}
        attrs = f'key="{key}" mdate="2023-0{1 + i % 9}-1{i % 10}"'
        if i % 4 == 0:
            access = rng.choice(["open", "closed"])
            attrs += f' access="{access}"'
            rec["access_type"] = access
        body = []
        for a in authors:
            body.append(f"<author>{xml_escape(a, ent)}</author>")
        if i % 7 == 0:
            # Inline markup inside the title is flattened to its text.
            w0, rest = words[0].capitalize(), " ".join(words[1:])
            body.append(f"<title><i>{xml_escape(w0, ent)}</i> {xml_escape(rest, ent)}"
                        f"{' &amp; friends' if i % 9 == 0 else ''}</title>")
        else:
            body.append(f"<title>  {xml_escape(title, ent)}\n</title>")
        body.append(f"<year>{year}</year>")
        if kind in ("article",) and i % 5:
            v = rng.choice(VENUES)
            body.append(f"<journal>{xml_escape(v, ent)}</journal>")
            rec["venue"] = v
        elif kind in ("inproceedings", "incollection", "proceedings") and i % 5:
            v = rng.choice(VENUES)
            body.append(f"<booktitle>{xml_escape(v, ent)}</booktitle>")
            rec["venue"] = v
        if kind in ("book", "proceedings", "phdthesis") and i % 2 == 0:
            p = rng.choice(PUBLISHERS)
            body.append(f"<publisher>{xml_escape(p, ent)}</publisher>")
            rec["publisher"] = p
        if i % 3 == 1:
            url = f"https://doi.org/10.1000/fx.{i}?a=1&b=2"
            body.append(f"<ee>{xml_escape(url, False)}</ee>")
            rec["url"] = url
        if i % 6 == 2:
            abstract = "We study " + " ".join(rng.sample(WORDS, 5)) + " <at scale>."
            body.append(f"<abstract><![CDATA[{abstract}]]></abstract>")
            rec["abstract"] = abstract
        fields = [rng.choice(FIELDS) for _ in range(rng.randint(0, 3))]
        for f in fields:
            body.append(f"<field>{f}</field>")
        rec["fields_of_study"] = fields
        if i % 2 == 0:
            rec["in_citations"] = rng.randint(0, 5000)
            body.append(f"<in_citations>{rec['in_citations']}</in_citations>")
        if i % 5 == 1:
            rec["out_citations"] = rng.randint(0, 80)
            body.append(f"<out_citations>{rec['out_citations']}</out_citations>")
        if i % 10 == 3:
            body.insert(1, "<!-- editorial note -->")
        if i == malformed_at:
            # Mismatched end tag: the reader must drop this record and resync.
            body.append("<note>unterminated</year>")
            issues = [{"kind": "MalformedXml", "source_key": key}]
        else:
            expected.append(rec)
        parts.append(f"<{kind} {attrs}>" + "".join(body) + f"</{kind}>")
    parts.append("</dblp>")
    return "\n".join(parts) + "\n", expected, issues


# ---------------------------------------------------------------- JSONL

def jsonl_fixture(rng: random.Random):
    lines, expected = [], []
    malformed_line = 42
    types = ["article", "proceedings", "book", "incollection", "phdthesis", "mastersthesis", "other"]
    for i in range(110):
        if i + 1 == malformed_line:
            issues = [{"kind": "SchemaViolation", "line": len(lines) + 1}]
            lines.append('{"id":"bad0000000000001","title":"Broken","year":"twenty-twenty"}')
            continue
        rec = {"id": "%016x" % rng.getrandbits(64),
               "title": " ".join(rng.sample(WORDS, 3)).capitalize(),
               "year": rng.randint(1950, 2024)}
        if i % 2:
            rec["authors"] = [f"{rng.choice(FIRST)} {rng.choice(LAST)}" for _ in range(rng.randint(1, 3))]
        if i % 3:
            rec["venue"] = rng.choice(VENUES)
        if i % 5 == 0:
            rec["publisher"] = rng.choice(PUBLISHERS)
        if i % 4:
            rec["paper_type"] = rng.choice(types)
        if i % 6 == 0:
            rec["fields_of_study"] = [rng.choice(FIELDS) for _ in range(3)]
        if i % 7:
            rec["access_type"] = rng.choice(["open", "closed", "unknown"])
        if i % 8 == 0:
            rec["url"] = f"https://example.org/{i}"
        if i % 2 == 0:
            rec["in_citations"] = rng.randint(0, 10**6)
            rec["out_citations"] = rng.randint(0, 300)
        if i % 9 == 0:
            rec["abstract"] = "Abstract with \"quotes\", commas, and a tab\there."
        keys = list(rec.keys())
        rng.shuffle(keys)
        lines.append(json.dumps({k: rec[k] for k in keys}, ensure_ascii=(i % 2 == 0)))
        if i % 13 == 0:
            lines.append("")
        expected.append(rec)
    return "\n".join(lines) + "\n", expected, issues


# ---------------------------------------------------------------- text

def tokenize(text: str):
    tokens, word = [], bytearray()

    def flush():
        if len(word) >= 3:
            w = word.decode("utf-8")
            if w not in STOPWORDS:
                tokens.append(STEMMER.stem(w))
        word.clear()

    for b in text.encode("utf-8"):
        if 65 <= b <= 90:
            word.append(b + 32)
        elif 97 <= b <= 122 or b >= 0x80:
            word.append(b)
        else:
            flush()
    flush()
    return tokens


PREPROCESS_DOCS = [
    ("p01", "Computing Computers Computes", None),
    ("p02", "The of and to", None),
    ("p03", "Relational Databases for Generalizations", "We study relational algebra, query plans and indexes."),
    ("p04", "Oscillators in 3D-printed circuits (2nd ed.)", "Oscillating signals; hopeful results!"),
    ("p05", "Topic models: LDA, pLSA & NMF", "Latent Dirichlet allocation assigns topics to words."),
    ("p06", "Citation analysis of scholarly publications", "Citations, cited-by counts and h-indices."),
    ("p07", "Müller's conjecture on naïve Bayes", "A café-style résumé of classifiers."),
    ("p08", "It is what it is", None),
    ("p09", "Streaming XML parsers", "Parsing gigabyte dumps with bounded memory, one record at a time."),
    ("p10", "Sky, happy agreed filing", "Conditional probabilities and rationalization."),
    ("p11", "Faceted search with auto-complete", "Suggestions ranked by counts; regexes allowed."),
    ("p12", "A", ""),
    ("p13", "Jensen-Shannon divergence", "Multidimensional scaling of topic distributions."),
    ("p14", "Effective, efficient, and effectiveness", "Operational operators operate."),
    ("p15", "Knowledge graphs", "Entities, relations, embeddings; link prediction."),
    ("p16", "Ph.D. thesis on hopefulness", "Hopefully the goodness of fit improves."),
    ("p17", "Graph neural networks", "Message passing networks generalize convolutions."),
    ("p18", "Visual analytics dashboards", "Interactive visualizations: treemaps, boxplots, histograms."),
    ("p19", "Big bibliographic data", "DBLP, Semantic Scholar and OpenAlex records are merged."),
    ("p20", "ALLCAPS TITLE WITH 42 NUMBERS", "x_y z-axis 1999 tokens."),
]


def preprocess_fixture():
    docs, dropped, vocab = [], [], set()
    for pid, title, abstract in PREPROCESS_DOCS:
        text = title + (" " + abstract if abstract is not None else "")
        toks = tokenize(text)
        if not toks:
            dropped.append(pid)
            continue
        docs.append((pid, toks))
        vocab.update(toks)
    vocabulary = sorted(vocab, key=lambda s: s.encode("utf-8"))
    index = {s: i for i, s in enumerate(vocabulary)}
    counts = {}
    for _, toks in docs:
        for t in toks:
            counts[t] = counts.get(t, 0) + 1
    return {
        "documents": [{"id": p, "title": t, "abstract": a} for p, t, a in PREPROCESS_DOCS],
        "expected": {
            "vocabulary": vocabulary,
            "doc_ids": [p for p, _ in docs],
            "docs": [[index[t] for t in toks] for _, toks in docs],
            "dropped_ids": dropped,
            "token_total": sum(len(t) for _, t in docs),
            "term_counts": {t: counts[t] for t in vocabulary},
        },
    }


def porter_vocabulary():
    # English prose from the Python standard library's sources gives a broad,
    # reproducible word sample.
    words = set()
    stdlib = Path(sysconfig.get_paths()["stdlib"])
    for src in sorted(stdlib.glob("*.py"))[:120]:
        words.update(w.lower() for w in re.findall(r"[A-Za-z]{2,}", src.read_text(errors="ignore")))
    words = set(random.Random(7).sample(sorted(words), min(6000, len(words))))
    words.update("""
    caresses ponies ties caress cats feed agreed plastered bled motoring sing conflated troubled
    sized hopping tanned falling hissing fizzed failing filing happy sky relational conditional
    rational valenci hesitanci digitizer conformabli radicalli differentli vileli analogousli
    vietnamization predication operator feudalism decisiveness hopefulness callousness formaliti
    sensitiviti sensibiliti triplicate formative formalize electriciti electrical hopeful goodness
    revival allowance inference airliner gyroscopic adjustable defensible irritant replacement
    adjustment dependent adoption homologou communism activate angulariti homologous effective
    bowdlerize probate rate cease controll roll generalizations oscillators computing computers
    computes comput yy y by aeiou syzygy queue queueing flying dying lying eed ed ing sses ies
    """.split())
    words = sorted(w for w in words if w.isascii())
    return [(w, STEMMER.stem(w)) for w in words]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240611)

    xml, xml_expected, xml_issues = xml_fixture(rng)
    (OUT / "dump.xml").write_text(xml, encoding="utf-8")
    (OUT / "dump.expected.jsonl").write_text(
        "".join(canonical_line(r) + "\n" for r in xml_expected), encoding="utf-8")
    (OUT / "dump.expected_issues.json").write_text(json.dumps(xml_issues, indent=1) + "\n")

    jl, jl_expected, jl_issues = jsonl_fixture(rng)
    (OUT / "records.jsonl").write_text(jl, encoding="utf-8")
    (OUT / "records.expected.jsonl").write_text(
        "".join(canonical_line(r) + "\n" for r in jl_expected), encoding="utf-8")
    (OUT / "records.expected_issues.json").write_text(json.dumps(jl_issues, indent=1) + "\n")

    (OUT / "preprocess.json").write_text(
        json.dumps(preprocess_fixture(), ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    (OUT / "porter_vocabulary.tsv").write_text(
        "".join(f"{w}\t{s}\n" for w, s in porter_vocabulary()), encoding="utf-8")


if __name__ == "__main__":
    main()
