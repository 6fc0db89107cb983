import pytest

from docgat.corpus import (
    Corpus,
    Document,
    Label,
    LABELS,
    load_corpus,
    save_corpus,
    stratified_kfold,
)


class TestLabel:
    def test_fixed_bijection(self):
        assert [(l.display, int(l)) for l in LABELS] == [
            ("thyroid", 0), ("colon", 1), ("lung", 2), ("generic", 3)
        ]

    @pytest.mark.parametrize("name", ["thyroid", "Thyroid", "THYROID", " thyroid "])
    def test_parse_case_insensitive(self, name):
        assert Label.parse(name) is Label.THYROID

    def test_unknown_name_is_an_error(self):
        with pytest.raises(ValueError, match="unknown label.*breast"):
            Label.parse("breast")


class TestDocument:
    def test_empty_text_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            Document("d1", "   \n\t ")

    def test_duplicate_ids_rejected(self):
        docs = (Document("d1", "x y"), Document("d1", "y z"))
        with pytest.raises(ValueError, match="duplicate document id.*d1"):
            Corpus(docs)


class TestLoadCorpus:
    def test_single_jsonl_record(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id":"d1","text":"Telomerase is reactivated.","label":"thyroid"}\n')
        corpus = load_corpus(path)
        assert len(corpus) == 1
        assert corpus[0].label is Label.THYROID
        assert int(corpus[0].label) == 0

    def test_label_case_insensitive(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id":"d1","text":"Telomerase is reactivated.","label":"Thyroid"}\n')
        assert load_corpus(path)[0].label is Label.THYROID

    def test_unknown_label_named(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id":"d1","text":"t","label":"breast"}\n')
        with pytest.raises(ValueError, match="unknown label.*breast"):
            load_corpus(path)

    def test_malformed_record_names_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id":"d1","text":"ok"}\n{oops\n')
        with pytest.raises(ValueError, match=":2:"):
            load_corpus(path)

    def test_missing_field_names_line(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id":"d1"}\n')
        with pytest.raises(ValueError, match=":1:.*text"):
            load_corpus(path)

    def test_duplicate_id_names_id(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id":"d1","text":"a b"}\n{"id":"d1","text":"c d"}\n')
        with pytest.raises(ValueError, match="d1"):
            load_corpus(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="nope.jsonl"):
            load_corpus(tmp_path / "nope.jsonl")

    def test_csv_with_quoting(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text('id,text,label\nd1,"Commas, and ""quotes"".",lung\nd2,No label,\n')
        corpus = load_corpus(path)
        assert corpus[0].text == 'Commas, and "quotes".'
        assert corpus[0].label is Label.LUNG
        assert corpus[1].label is None


class TestRoundTrip:
    docs = (
        Document("d1", 'Weird "text"\nwith newline, comma.', Label.COLON),
        Document("d2", "Unicode: naïve café α=0.5.", Label.GENERIC),
        Document("d3", "Unlabeled inference input."),
    )

    @pytest.mark.parametrize("fmt", ["jsonl", "csv"])
    def test_every_field_preserved(self, tmp_path, fmt):
        corpus = Corpus(self.docs)
        path = tmp_path / f"c.{fmt}"
        save_corpus(corpus, path, fmt)
        reloaded = load_corpus(path, fmt)
        assert reloaded.documents == corpus.documents
        # serialize again: identical bytes
        path2 = tmp_path / f"c2.{fmt}"
        save_corpus(reloaded, path2, fmt)
        assert path.read_bytes() == path2.read_bytes()


def _counted_corpus(counts):
    docs = []
    for label, count in zip(LABELS, counts):
        for i in range(count):
            docs.append(Document(f"{label.display}-{i}", "body text", label))
    return Corpus(tuple(docs))


class TestStratifiedKfold:
    def test_round_robin_counts(self):
        corpus = _counted_corpus([40, 30, 20, 10])
        plan = stratified_kfold(corpus, 5, seed=3)
        for fold in range(5):
            ids = plan.fold_ids(fold)
            per_class = [sum(1 for i in ids if i.startswith(l.display)) for l in LABELS]
            assert per_class == [8, 6, 4, 2]

    def test_deterministic(self):
        corpus = _counted_corpus([11, 9, 8, 7])
        a = stratified_kfold(corpus, 3, seed=5)
        b = stratified_kfold(corpus, 3, seed=5)
        assert a.assignments == b.assignments
        c = stratified_kfold(corpus, 3, seed=6)
        assert c.assignments != a.assignments

    def test_small_class_error(self):
        corpus = _counted_corpus([10, 10, 10, 3])
        with pytest.raises(ValueError, match="generic.*3"):
            stratified_kfold(corpus, 5, seed=0)

    def test_unlabeled_rejected(self):
        docs = (Document("a", "x", Label.COLON), Document("b", "y"))
        with pytest.raises(ValueError, match="b.*no label"):
            stratified_kfold(Corpus(docs), 2, seed=0)

    @pytest.mark.parametrize("k,seed", [(2, 0), (3, 1), (5, 2), (7, 99)])
    def test_folds_partition_the_corpus(self, k, seed):
        corpus = _counted_corpus([k + 3, k + 1, 2 * k, k])
        plan = stratified_kfold(corpus, k, seed)
        all_ids = [i for f in range(k) for i in plan.fold_ids(f)]
        assert sorted(all_ids) == sorted(d.id for d in corpus)
        assert len(set(all_ids)) == len(all_ids)

    def test_near_perfect_stratification(self):
        corpus = _counted_corpus([13, 11, 9, 17])
        plan = stratified_kfold(corpus, 4, seed=8)
        for label, total in zip(LABELS, [13, 11, 9, 17]):
            per_fold = [
                sum(1 for i in plan.fold_ids(f) if i.startswith(label.display))
                for f in range(4)
            ]
            assert max(per_fold) - min(per_fold) <= 1
            assert sum(per_fold) == total

    def test_split_checks_fold_range(self):
        corpus = _counted_corpus([3, 3, 3, 3])
        plan = stratified_kfold(corpus, 3, seed=1)
        train, test = plan.split(corpus, 1)
        assert len(train) + len(test) == len(corpus)
        assert {d.id for d in train}.isdisjoint(d.id for d in test)
        with pytest.raises(ValueError, match="out of range"):
            plan.split(corpus, 3)

    def test_k_below_two_rejected(self):
        corpus = _counted_corpus([3, 3, 3, 3])
        with pytest.raises(ValueError, match="k must be"):
            stratified_kfold(corpus, 1, seed=0)
