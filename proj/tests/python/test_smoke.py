import csv
import itertools
import json
import os
import re
import statistics
from pathlib import Path
from urllib.parse import urlsplit

import pytest
from scipy.stats import chi2_contingency

import debatenet

FIXTURES = Path(os.environ.get("DEBATENET_FIXTURES", Path(__file__).resolve().parents[1] / "fixtures"))
CHAIN = FIXTURES / "chain"
TAGS = ["T", "N", "P", "S", "UNC"]
KINDS = ["swing", "safe", "all"]


def chain_options():
    return {
        "tweets": str(CHAIN / "tweets.jsonl"),
        "edges": str(CHAIN / "edges.csv"),
        "states": str(CHAIN / "states.csv"),
        "url_map": str(CHAIN / "url_map.csv"),
        "labels": str(CHAIN / "labels.csv"),
        "bot_scores": str(CHAIN / "bot_scores.csv"),
    }


@pytest.fixture(scope="module")
def chain_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("chain")
    debatenet.run_stage("all", out, chain_options())
    return out


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


# ---------------------------------------------------------------------------
# bindings


def test_version():
    assert debatenet.__version__


def test_unit_fit():
    m = debatenet.fit_bicm([1, 1], [1, 1])
    for row in m.probabilities():
        for p in row:
            assert p == pytest.approx(0.5, abs=1e-8)


def test_fit_reproduces_degrees():
    top, bottom = [3, 2, 2, 1], [2, 2, 2, 1, 1]
    m = debatenet.fit_bicm(top, bottom, tol=1e-12)
    assert m.expected_top_degrees() == pytest.approx(top, rel=1e-10)
    assert m.expected_bottom_degrees() == pytest.approx(bottom, rel=1e-10)


def test_fit_errors():
    with pytest.raises(debatenet.InputError):
        debatenet.fit_bicm([3], [1])
    with pytest.raises(ValueError):
        debatenet.fit_bicm([-1, 1], [0])
    with pytest.raises(debatenet.ConvergenceError):
        debatenet.fit_bicm([3, 2, 2, 1, 3, 2, 1, 2], [2, 3, 1, 2, 2, 1, 3, 2], tol=1e-15, max_iter=1)


def test_poisson_binomial_tail():
    assert debatenet.poisson_binomial_upper_tail([0.5, 0.5], 2) == pytest.approx(0.25, abs=1e-15)
    probs = [0.1, 0.2, 0.3]
    assert debatenet.poisson_binomial_upper_tail(probs, 2) == pytest.approx(0.098, abs=1e-15)
    assert debatenet.poisson_binomial_upper_tail(probs, 0) == 1.0


def test_projection_of_two_blocks():
    pairs = []
    for v in ("A1", "A2", "A3"):
        pairs += [(v, f"a{k}") for k in range(12)]
    for v in ("B1", "B2", "B3"):
        pairs += [(v, f"b{k}") for k in range(12)]
    g = debatenet.build_bipartite(pairs)
    m = debatenet.fit_bicm(*g.degrees())
    one = debatenet.validate_projection(g, m, alpha=0.05)
    four = debatenet.validate_projection(g, m, alpha=0.05, threads=4)
    assert one == four
    assert len(one["edges"]) == 6
    for a, b, count, p in one["edges"]:
        assert a[0] == b[0]
        assert count == 12
    with pytest.raises(ValueError):
        debatenet.validate_projection(g, m, alpha=1.5)


def test_louvain_two_cliques():
    nodes = [f"n{i}" for i in range(10)]
    edges = [(base + i, base + j, 1.0) for base in (0, 5) for i in range(5) for j in range(i + 1, 5)]
    edges.append((4, 5, 1.0))
    p = debatenet.louvain(nodes, edges, seed=3)
    labels = p["labels"]
    assert len({labels[n] for n in nodes[:5]}) == 1
    assert len({labels[n] for n in nodes[5:]}) == 1
    assert labels["n0"] != labels["n9"]
    assert p["modularity"] == pytest.approx(2 * (10 / 21 - 0.25), abs=1e-12)
    assert p["pass_modularity"] == sorted(p["pass_modularity"])


def test_label_propagation():
    arcs = [("a", "b", 1), ("b", "c", 1), ("x", "y", 1), ("z", "y", 3)]
    p = debatenet.label_propagation(arcs, {"a": 0, "z": 1})
    assert [p["labels"][n] for n in "abc"] == [0, 0, 0]
    assert [p["labels"][n] for n in "xyz"] == [1, 1, 1]
    assert p["origins"]["a"] == "louvain-seed"
    assert p["origins"]["b"] == "propagated"
    with pytest.raises(ValueError, match="ghost"):
        debatenet.label_propagation(arcs, {"ghost": 0})


def test_tests():
    r = debatenet.chi_square([[10, 20], [20, 10]])
    assert abs(r["statistic"] - 6.6667) <= 1e-4
    assert abs(r["p_value"] - 0.0098) <= 1e-4
    ks = debatenet.ks_test([1, 2], [3, 4])
    assert ks["statistic"] == 1.0
    assert ks["p_value"] == pytest.approx(1 / 3)
    assert ks["method"] == "exact"
    mw = debatenet.mann_whitney_u([1, 4], [2, 3])
    assert mw["statistic"] == 2.0
    assert mw["effect"] == 0.5


def test_domain_helpers():
    assert debatenet.registrable_domain("http://news.bbc.co.uk") == "bbc.co.uk"
    assert debatenet.registrable_domain("not a url") is None
    states = [("Florida", "swing"), ("Michigan", "swing"), ("Indiana", "safe")]
    assert debatenet.assign_state("florida tonight", states) == "Florida"
    assert debatenet.assign_state("Florida and Michigan", states) == "excluded-multi"
    assert debatenet.assign_state("nothing here", states) == "excluded-none"
    classes, warnings = debatenet.decile_bot_classification({f"u{i:02d}": i / 100 for i in range(100)})
    assert sum(c == "human" for c in classes.values()) == 10
    assert sum(c == "bot" for c in classes.values()) == 10
    assert warnings == []


def test_missing_upstream(tmp_path):
    with pytest.raises(debatenet.StageError, match="ingest"):
        debatenet.run_stage("fit", tmp_path)


# ---------------------------------------------------------------------------
# independent recomputation of the fixture report


def match_state(text, states):
    found = set()
    for name, _ in states:
        words = r"\s+".join(re.escape(w) for w in name.split())
        if re.search(rf"(?<![A-Za-z0-9]){words}(?![A-Za-z0-9])", text, re.IGNORECASE):
            found.add(name)
    return found


def domain_of(url):
    parts = urlsplit(url if "://" in url else "//" + url)
    host = (parts.hostname or "").rstrip(".")
    if "." not in host or " " in url:
        return None
    # the fixture only uses single-label public suffixes
    return ".".join(host.split(".")[-2:])


def orientation_of(text):
    text = (text or "").lower()
    if "left" in text:
        return "left"
    if "right" in text:
        return "right"
    return None


def pct(num, den):
    return None if den == 0 else 100.0 * num / den


def oracle_inputs(partition_csv):
    states = [(r["name"], r["kind"]) for r in read_csv(CHAIN / "states.csv")]
    kind = dict(states)
    url_map = {r["short_url"]: r["resolved_url"] for r in read_csv(CHAIN / "url_map.csv")}
    labels = {r["domain"]: (r["tag"], orientation_of(r["orientation"])) for r in read_csv(CHAIN / "labels.csv")}
    scores = {r["user_id"]: float(r["score"]) for r in read_csv(CHAIN / "bot_scores.csv")}
    communities = {r["node_id"]: int(r["label"]) for r in read_csv(partition_csv) if r["label"] != ""}

    counts = dict(input=0, excluded_language=0, excluded_multi=0, excluded_none=0, kept=0)
    tweets = []
    with open(CHAIN / "tweets.jsonl", encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            t = json.loads(line)
            counts["input"] += 1
            if t.get("lang", "").lower() != "en":
                counts["excluded_language"] += 1
                continue
            found = match_state(t["text"], states)
            if len(found) > 1:
                counts["excluded_multi"] += 1
                continue
            if not found:
                counts["excluded_none"] += 1
                continue
            counts["kept"] += 1
            urls = []
            for u in t.get("urls", []):
                u = url_map.get(u, u)
                if u not in urls:
                    urls.append(u)
            state = found.pop()
            tweets.append(dict(id=t["tweet_id"], author=t["author_id"], state=state, kind=kind[state], urls=urls))

    def url_class(u):
        d = domain_of(u)
        tag, orient = labels.get(d, ("UNC", None)) if d else ("UNC", None)
        return tag, orient

    ranked = sorted(scores[u] for u in communities if u in scores)
    n = len(ranked)
    bot_class = {}
    if n >= 10:
        c = n // 10
        for u in communities:
            if u in scores:
                s = scores[u]
                bot_class[u] = "human" if s < ranked[c] else "bot" if s > ranked[n - c - 1] else "unclassified"
    return dict(states=states, tweets=tweets, counts=counts, communities=communities, scores=scores,
                url_class=url_class, bot_class=bot_class, has_bots=n >= 10,
                has_orientation=any(o for _, o in labels.values()))


def oracle_report(inp):
    tweets, comm, url_class, bot_class = inp["tweets"], inp["communities"], inp["url_class"], inp["bot_class"]
    labels = sorted(set(comm.values()))
    groups = ["validated"] + [f"community_{k}" for k in labels] + ["unassigned", "dataset"]

    def in_group(t, g):
        a = t["author"]
        if g == "dataset":
            return True
        if g == "unassigned":
            return a not in comm
        if g == "validated":
            return a in comm
        return a in comm and g == f"community_{comm[a]}"

    def sel(g, k, cls=None):
        return [t for t in tweets if in_group(t, g) and (k == "all" or t["kind"] == k)
                and (cls is None or bot_class.get(t["author"]) == cls)]

    def urls_of(ts, tag=None):
        return [u for t in ts for u in t["urls"] if tag is None or url_class(u)[0] == tag]

    states = [dict(state=s, kind=k, tweets=sum(t["state"] == s for t in tweets),
                   urls=sum(len(t["urls"]) for t in tweets if t["state"] == s)) for s, k in inp["states"]]

    communities = []
    for g in groups:
        ts = sel(g, "all")
        us = urls_of(ts)
        row = dict(group=g, users=len({t["author"] for t in ts}), tweets=len(ts),
                   safe_pct=pct(len(sel(g, "safe")), len(ts)), swing_pct=pct(len(sel(g, "swing")), len(ts)),
                   urls=len(us), left_pct=None, right_pct=None)
        if inp["has_orientation"]:
            row["left_pct"] = pct(sum(url_class(u)[1] == "left" for u in us), len(us))
            row["right_pct"] = pct(sum(url_class(u)[1] == "right" for u in us), len(us))
        communities.append(row)

    reliability = []
    for g in groups:
        for k in KINDS:
            ts = sel(g, k)
            us = urls_of(ts)
            row = dict(group=g, kind=k, users=len({t["author"] for t in ts}), tweets=len(ts), urls=len(us))
            for tag in TAGS:
                row[f"n_{tag}"] = sum(url_class(u)[0] == tag for u in us)
            for tag in TAGS:
                row[f"pct_{tag}"] = pct(row[f"n_{tag}"], len(us))
            reliability.append(row)

    bot_groups = groups[:-2]
    bot_accounts, bot_traffic = [], []
    if inp["has_bots"]:
        for g in bot_groups:
            for cls in ("human", "bot"):
                ts = sel(g, "all", cls)
                bot_accounts.append(dict(group=g, **{"class": cls}, users=len({t["author"] for t in ts}),
                                         tweets=len(ts), urls=len(urls_of(ts))))
        for link in ("all", "T", "N"):
            tag = None if link == "all" else link
            for g in bot_groups:
                def n(k, cls):
                    return len(urls_of(sel(g, k, cls), tag))
                classified = {k: n(k, "human") + n(k, "bot") for k in KINDS}
                bot_traffic.append(dict(
                    links=link, group=g, urls=classified["all"],
                    swing_pct=pct(classified["swing"], classified["all"]),
                    safe_pct=pct(classified["safe"], classified["all"]),
                    bot_pct=pct(n("all", "bot"), classified["all"]),
                    human_pct=pct(n("all", "human"), classified["all"]),
                    swing_bot_pct=pct(n("swing", "bot"), classified["swing"]),
                    swing_human_pct=pct(n("swing", "human"), classified["swing"]),
                    safe_bot_pct=pct(n("safe", "bot"), classified["safe"]),
                    safe_human_pct=pct(n("safe", "human"), classified["safe"])))

    virality, url_shares = [], []
    for g in groups:
        for k in KINDS:
            shares = {}
            for u in urls_of(sel(g, k)):
                shares[u] = shares.get(u, 0) + 1
            for tag in TAGS + ["all"]:
                vals = [c for u, c in shares.items() if tag == "all" or url_class(u)[0] == tag]
                virality.append(dict(group=g, kind=k, tag=tag, distinct_urls=len(vals), shares=sum(vals),
                                     mean=sum(vals) / len(vals) if vals else None,
                                     median=float(statistics.median(vals)) if vals else None))
            if g in bot_groups:
                for u in sorted(shares):
                    url_shares.append(dict(group=g, kind=k, url=u, tag=url_class(u)[0], shares=shares[u]))

    return dict(groups=groups, ingest=inp["counts"], has_bots=inp["has_bots"],
                has_orientation=inp["has_orientation"],
                tables=dict(states=states, communities=communities, reliability=reliability,
                            bot_accounts=bot_accounts, bot_traffic=bot_traffic, virality=virality,
                            url_shares=url_shares))


def assert_close(actual, expected, where="report"):
    if isinstance(expected, dict):
        assert set(actual) == set(expected), where
        for k in expected:
            assert_close(actual[k], expected[k], f"{where}.{k}")
    elif isinstance(expected, list):
        assert len(actual) == len(expected), where
        for i, (a, e) in enumerate(zip(actual, expected)):
            assert_close(a, e, f"{where}[{i}]")
    elif isinstance(expected, float):
        assert actual == pytest.approx(expected, rel=1e-12, abs=1e-12), where
    else:
        assert actual == expected, where


def test_report_matches_oracle(chain_dir):
    inp = oracle_inputs(chain_dir / "partition.csv")
    expected = oracle_report(inp)
    report = json.loads((chain_dir / "report.json").read_text())
    assert report["notices"] == []
    for key in ("groups", "ingest", "has_bots", "has_orientation", "tables"):
        assert_close(report[key], expected[key], key)


def exact_pvalue(a, b, stat):
    pooled = a + b
    observed = stat(a, b)
    total = extreme = 0
    for pick in itertools.combinations(range(len(pooled)), len(a)):
        chosen = set(pick)
        x = [pooled[i] for i in chosen]
        y = [pooled[i] for i in range(len(pooled)) if i not in chosen]
        total += 1
        extreme += stat(x, y) >= observed - 1e-12
    return extreme / total


def ks_stat(a, b):
    return max(abs(sum(v <= x for v in a) / len(a) - sum(v <= x for v in b) / len(b)) for x in a + b)


def u_stat(a, b):
    return sum(1.0 if x > y else 0.5 if x == y else 0.0 for x in a for y in b)


def test_tests_match_oracle(chain_dir):
    inp = oracle_inputs(chain_dir / "partition.csv")
    comm, scores = inp["communities"], inp["scores"]
    produced = json.loads((chain_dir / "tests.json").read_text())["tests"]

    table = [[0, 0], [0, 0]]
    for t in inp["tweets"]:
        if t["author"] in comm:
            for u in t["urls"]:
                tag = inp["url_class"](u)[0]
                if tag in ("T", "N"):
                    table[0 if t["kind"] == "swing" else 1][0 if tag == "T" else 1] += 1
    chi, p, _, _ = chi2_contingency(table, correction=False)
    assert produced[0]["test"] == "chi_square"
    assert produced[0]["statistic"] == pytest.approx(chi, rel=1e-12)
    assert produced[0]["p_value"] == pytest.approx(p, rel=1e-10)

    c0, c1 = sorted(set(comm.values()))[:2]
    expected = []
    for scope in ("all", "urls"):
        ts = [t for t in inp["tweets"] if t["author"] in comm and t["author"] in scores
              and (scope == "all" or t["urls"])]
        validated = [scores[t["author"]] for t in ts]
        a = [scores[t["author"]] for t in ts if comm[t["author"]] == c0]
        b = [scores[t["author"]] for t in ts if comm[t["author"]] == c1]
        for name_x, x, name_y, y in (("validated", validated, f"community_{c0}", a),
                                     ("validated", validated, f"community_{c1}", b),
                                     (f"community_{c1}", b, f"community_{c0}", a)):
            expected.append(("ks", name_x, name_y, scope, ks_stat(x, y), exact_pvalue(x, y, ks_stat)))
            u = u_stat(x, y)
            expected.append(("mwu", name_x, name_y, scope, u,
                             exact_pvalue(x, y, lambda p, q: abs(u_stat(p, q) - len(p) * len(q) / 2)),
                             u / (len(x) * len(y))))
    rows = produced[1:]
    assert len(rows) == len(expected)
    for row, exp in zip(rows, expected):
        assert (row["test"], row["sample_a"], row["sample_b"], row["scope"]) == exp[:4]
        assert row["statistic"] == pytest.approx(exp[4], abs=1e-12)
        assert row["p_value"] == pytest.approx(exp[5], abs=1e-10)
        if row["test"] == "mwu":
            assert row["effect"] == pytest.approx(exp[6], abs=1e-12)
            assert row["effect"] + row["effect_reverse"] == pytest.approx(1.0)


def test_committed_outputs(chain_dir):
    assert (chain_dir / "report.json").read_bytes() == (CHAIN / "expected_report.json").read_bytes()
    assert (chain_dir / "tests.json").read_bytes() == (CHAIN / "expected_tests.json").read_bytes()


def test_chain_is_deterministic(chain_dir, tmp_path):
    opts = dict(chain_options(), threads=4)
    debatenet.run_stage("all", tmp_path, opts)
    for name in ("report.json", "tests.json", "partition.csv", "projection.json", "model.json"):
        assert (tmp_path / name).read_bytes() == (chain_dir / name).read_bytes(), name


def test_chain_partition_follows_projection(chain_dir):
    # verified users sharing a validated link must end up in the same community
    part = {r["node_id"]: r["label"] for r in read_csv(chain_dir / "partition.csv")}
    for r in read_csv(chain_dir / "projection.csv"):
        assert part[r["source"]] == part[r["target"]]
