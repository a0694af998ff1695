import math
import os
import random

import pytest

import hatepipe

DATA = os.path.join(os.path.dirname(__file__), "..", "data")


def test_normalize():
    assert hatepipe.normalize("@John said DON’T   go… #now") == "<USER> said do n't go... <HASHTAG>"
    assert hatepipe.is_english("the cat is on the mat")
    assert not hatepipe.is_english("el gato come pan y bebe agua fresca")


def test_loss_and_weights():
    loss, grad = hatepipe.weighted_ce_loss([0.0, 0.0], 0, 2.0)
    assert loss == pytest.approx(2 * math.log(2))
    assert grad == pytest.approx([-1.0, 1.0])
    w = hatepipe.class_weights({"hate": 3185, "normal": 6815})
    assert w["hate"] == pytest.approx(10000 / (2 * 3185))


def test_metrics_row():
    assert hatepipe.table_row("Weighted Loss Threshold 3", 76, 53, 24, 155) == (
        "Weighted Loss Threshold 3 & 75 & 76 & 59 & 66"
    )
    m = hatepipe.metrics(["a", "b", "a"], ["a", "b", "b"], ["a", "b"])
    assert m["mode"] == "macro"
    assert m["accuracy"] == pytest.approx(2 / 3)


def test_loaders_report_rows():
    r = hatepipe.load_dataset("parler", os.path.join(DATA, "parler_small.jsonl"))
    assert [row for row, _ in r["errors"]] == [4]
    assert {s["label"] for s in r["samples"]} == {"hate", "normal"}
    with pytest.raises(hatepipe.DataError):
        hatepipe.load_dataset("parler", os.path.join(DATA, "missing.jsonl"))
    with pytest.raises(hatepipe.UsageError):
        hatepipe.load_dataset("nope", os.path.join(DATA, "parler_small.jsonl"))


def _keyword_corpus(n, seed):
    rng = random.Random(seed)
    filler = ["alpha", "bravo", "charlie", "delta", "echo", "golf", "hotel", "india"]
    rows = []
    for i in range(n):
        words = [rng.choice(filler) for _ in range(6)]
        label = "hate" if i % 2 else "normal"
        if label == "hate":
            words[rng.randrange(6)] = "vermin"
        rows.append((" ".join(words), label))
    return rows


def test_train_predict_serialize(tmp_path):
    rows = _keyword_corpus(200, 1)
    model = hatepipe.train(rows[:160], rows[160:], epochs=5, hash_bits=12, lr=0.05)
    assert model.classes == ["hate", "normal"]
    assert model.predict("alpha vermin bravo") == "hate"
    assert model.predict("alpha bravo charlie") == "normal"
    path = tmp_path / "m.bin"
    model.save(path)
    loaded = hatepipe.Model.load(path)
    assert loaded.to_bytes() == model.to_bytes()
    blob = bytearray(model.to_bytes())
    blob[20] ^= 0xFF
    with pytest.raises(hatepipe.FormatError):
        hatepipe.Model.from_bytes(bytes(blob))


def test_explain_keyword():
    clf = hatepipe.FunctionClassifier(
        ["Other", "Jewish"], lambda t: [0.1, 0.9] if "jews" in t.split() else [0.9, 0.1]
    )
    e = hatepipe.explain(clf, "jews have a monopoly on evil", "Jewish", mode="exhaustive", html=True)
    assert e["token_weights"][0]["token"] == "jews"
    assert e["token_weights"][0]["weight"] > 0
    assert "<span" in e["html"]


def test_augment_accounting():
    rows = [("post number %d is here" % i, "normal") for i in range(20)]
    out, stats = hatepipe.augment(
        rows,
        translate=lambda text, src, tgt: text + " indeed" if tgt == "en" else text,
        languages=["es", "de"],
        max_parallel=2,
    )
    assert len(out) == len(rows) + sum(s["accepted"] for s in stats.values())
    assert all(hatepipe.normalize(s["text"]) == s["text"] for s in out)
    same, _ = hatepipe.augment(rows, translate=lambda text, src, tgt: text, languages=["es"])
    assert [(s["text"], s["label"]) for s in same] == rows


def test_topics_roundtrip():
    rng = random.Random(3)
    vocab = [["mosque", "quran", "imam", "sharia", "hijab"], ["torah", "rabbi", "kosher", "hebrew", "yiddish"]]
    texts = [" ".join(rng.choice(v) for _ in range(6)) for v in vocab for _ in range(80)]
    tm = hatepipe.fit_topics(texts, [10, 40], [3, 5])
    assert tm.n_topics >= 2
    back = hatepipe.TopicModel.deserialize(tm.serialize())
    assert back.serialize() == tm.serialize()
    assert "<TOPIC>" in tm.concat("mosque quran imam sharia")


def test_pipeline_distribution():
    detector = hatepipe.FunctionClassifier(["normal", "hate"], lambda t: [0.0, 1.0] if "hatemark" in t else [1.0, 0.0])
    target = hatepipe.FunctionClassifier(
        ["African", "Islam", "Other"], lambda t: [1.0, 0.0, 0.0] if "africa" in t else [0.0, 0.0, 1.0]
    )
    posts = ["they are hatemark from africa"] * 3 + ["they are hatemark here"] + ["this is a fine day"] * 6
    d = hatepipe.run_corpus(detector, target, posts, workers=3, batch_size=4)
    assert d["total_posts"] == 10
    assert d["hateful_posts"] == 4
    counts = {t["target"]: t["count"] for t in d["targets"]}
    assert counts["African"] == 3 and counts["Other"] == 1
    assert hatepipe.report(d, "csv").splitlines()[1] == "African,3,0.750000"
