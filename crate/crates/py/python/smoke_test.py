"""Quick check that the extension loads and the main entry points work."""

import json
import tempfile
from pathlib import Path

import piggyback_py as pb

assert set(pb.preset_names()) >= {"active", "mature", "new"}

c = pb.derive_c(16866, 1.6)
assert abs(c - 7378) < 1, c
assert abs(pb.q_email(3) - 1272.2) < 0.5

active = pb.RepositoryProfile(100_000, 1_000_000, 100, 400)
q = pb.q_news(active, "1.5Mbps", downtime=0.25)
assert abs(q - 9112.5) < 1e-6, q

value, text = pb.calc("c", ["V=16866", "b=1.6"])
assert "7378" in text and abs(value - c) < 1e-9

raw, clamped = pb.p_email(37.3, 27, 1000, 0)
assert raw >= 1.0 and clamped == 1.0

posted = pb.tr_news_series(pb.RepositoryProfile(1000, 100), 100.0, 5, 30, 60)
assert len(posted) == 61 and posted[0] == 0 and posted == sorted(posted)

payload = bytes(range(256)) * 10
url = "http://repository.example.org/oai"
ident = "http://repository.example.org/records/42.pdf"
for fmt, encode in (("news", pb.encode_news), ("email", pb.encode_email)):
    got_id, got = pb.extract(encode(ident, payload, url), fmt)
    assert got_id == ident and got == payload, fmt

scenario = pb.Scenario("new")
scenario.days = 30
result = scenario.run()
summary = json.loads(result.summary_json())
assert summary["days"] == 30 and len(summary["news"]) == 3
assert result.csv("news-cyclic").count("\n") == 31

with tempfile.TemporaryDirectory() as d:
    files = result.write(d)
    assert all(Path(f).exists() for f in files)

print("smoke test ok")
