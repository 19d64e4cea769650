import json
import math

import pytest

import arsent


def test_text_preparation():
    assert arsent.strip_noise("رائــــع!!") == "رائع"
    assert arsent.normalize("مدرسة") == "مدرسه"
    assert arsent.tokenize("الخدمه ممتازه") == ["الخدمه", "ممتازه"]
    assert arsent.light_stem("المدرسه") == "مدرس"
    assert arsent.preprocess("أحب المطعم!!", remove_stopwords=False) == ["احب", "المطعم"]


def test_external_stemmer_callback():
    prep = arsent.Preprocessor(remove_stopwords=False, stem_fn=lambda t: t[:2])
    assert prep("المطعم جميل") == ["ال", "جم"]


def test_vectorize_and_score():
    docs = [["ا", "ا", "ب"], ["ب", "ج"]]
    vocab = arsent.build_vocab(docs)
    assert vocab.terms == ["ا", "ب", "ج"]
    assert vocab.dfs == [1, 2, 1]
    m = arsent.vectorize(docs, vocab, "tfidf", [1, -1])
    dense = m.to_dense()
    assert dense[0][0] == pytest.approx(2 * (1 + math.log(2)))
    assert dense[0][1] == pytest.approx(1.0)

    x = arsent.DocTermMatrix.from_dense([[2], [0], [1], [0]], [1, -1, 1, -1])
    assert arsent.score(x, "correlation")[0] == pytest.approx(0.9045, abs=1e-4)


def test_selection_and_projection():
    x = arsent.DocTermMatrix.from_dense(
        [[1, 0, 1], [1, 1, 0], [0, 1, 1], [0, 1, 0]], [1, 1, -1, -1]
    )
    chosen = arsent.select(x, ["ig:2", "chi2:1"])
    assert chosen == [0]
    p = arsent.project(x, [2, 0])
    assert p.cols == 2
    assert p.column_origin == [0, 2]


def test_svm():
    x = arsent.DocTermMatrix.from_dense([[1.0], [-1.0]], [1, -1])
    model = arsent.train_svm(x, C=100, tolerance=1e-6)
    assert model.w[0] == pytest.approx(1.0, abs=1e-2)
    assert model.b == pytest.approx(0.0, abs=1e-2)
    assert model.predict([2.0]) == 1
    assert model.predict([0.0]) == -1
    assert model.margin() == pytest.approx(2.0, abs=2e-2)
    assert model.dump().startswith("linsvm")


def test_metrics_and_folds():
    m = arsent.metrics([1, 1, 1, -1, -1, 1, -1, -1, -1, -1], [1, 1, 1, 1, 1, -1, -1, -1, -1, -1])
    assert (m["tp"], m["tn"], m["fp"], m["fn"]) == (3, 4, 1, 2)
    assert m["accuracy"] == pytest.approx(0.7)
    folds = arsent.stratified_kfold([1] * 5 + [-1] * 5, 5)
    assert sorted(folds) == [0, 0, 1, 1, 2, 2, 3, 3, 4, 4]
    assert arsent.percent(0.87625) == 87.63


def test_cross_validate():
    pos = ["بحب هالمطعم كتير", "الاكل زاكي والخدمه ممتازه", "مكان حلو ورايق", "اسعار حلوه واكل زاكي"]
    neg = ["الخدمه سيئه جدا", "الاكل بارد وغالي", "مكان وسخ ومزعج", "ما عجبني ابدا سيء"]
    texts = pos * 3 + neg * 3
    labels = [1] * 12 + [-1] * 12
    report = arsent.cross_validate(texts, labels, k=3, stages=["ig:10"], remove_stopwords=False)
    assert len(report["folds"]) == 3
    assert 0.0 <= report["mean"]["accuracy"] <= 1.0
    assert report["config"]["stages"][0]["method"] == "ig"


def test_errors():
    with pytest.raises(arsent.DataError):
        arsent.train_svm(arsent.DocTermMatrix.from_dense([[1.0], [2.0]], [1, 1]))
    with pytest.raises(arsent.ValidationError):
        arsent.select(arsent.DocTermMatrix.from_dense([[1.0], [2.0]], [1, -1]), ["ig:0"])
    assert issubclass(arsent.DataError, arsent.ArsentError)


def test_run_experiment(tmp_path):
    rows = ["id,text,label"]
    for i in range(40):
        word = "ممتاز" if i % 2 == 0 else "سيء"
        rows.append(f"{i},{word} كلام عادي رقم{i},{'positive' if i % 2 == 0 else 'negative'}")
    (tmp_path / "c.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    (tmp_path / "run.toml").write_text(
        'seed = 2\n[corpus]\npath = "c.csv"\n'
        '[[selector_grid]]\nmethod = "ig"\nk = [2]\n'
        "[stage2]\nenabled = false\n[stage3]\nenabled = false\n[stage5]\nenabled = false\n",
        encoding="utf-8",
    )
    manifest = arsent.run_experiment(str(tmp_path / "run.toml"), str(tmp_path / "out"))
    assert manifest["seed"] == 2
    table = json.loads((tmp_path / "out" / "stage4_selection.json").read_text(encoding="utf-8"))
    assert table["rows"][0]["config"] == "IG/2"
