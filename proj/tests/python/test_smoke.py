# Copyright 2026 The keyfind Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import os

import pytest

import keyfind as kf


@pytest.fixture
def d1_item():
    return kf.EvalItem(
        id="d1",
        question="Which pair don't reproduce the same way?",
        task_type=kf.TaskType.ALPHABET_OPTION,
        answer_range=kf.AnswerRange.pairs(
            [
                ("A", "dog and wolf"),
                ("B", "rose and tulip"),
                ("C", "cat and catfish"),
                ("D", "caterpillar and butterfly"),
            ]
        ),
        gold_answer="C",
    )


def test_reference_extractor_on_the_worked_example(d1_item):
    response = kf.ModelResponse(
        item_id="d1",
        text="(A) is not the answer... So the correct answer is (D) Caterpillar and butterfly ...",
    )
    extractor = kf.make_extractor("reference-rules")
    key = extractor.extract(d1_item, response)
    assert key.serialize() == "D"
    assert kf.judge(d1_item, key) == "Wrong"

    opencompass = kf.make_extractor("regex:opencompass-style")
    assert opencompass.extract(d1_item, response).serialize() == "A"


def test_normalization_rules():
    assert kf.normalize("$10,000.", kf.TaskType.MATH) == "10000"
    assert kf.normalize("(a).", kf.TaskType.ALPHABET_OPTION) == "A"
    assert kf.normalize("  fruit   stand ", kf.TaskType.SHORT_TEXT) == "fruit stand"


def test_no_valid_answer_literal_round_trips():
    sentinel = kf.ExtractedKey.no_valid_answer()
    assert sentinel.serialize() == kf.NO_VALID_ANSWER
    assert kf.ExtractedKey.parse(kf.NO_VALID_ANSWER) == sentinel
    assert not sentinel.has_value


def test_kendall_and_delta():
    assert kf.kendall_tau_b([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(2 / 3)
    rows = kf.compute_delta_acc(
        [("a", 0.9342), ("b", 0.9065)], {"a": 0.5, "b": 1.8}
    )
    by_id = {row[0]: row for row in rows}
    assert by_id["a"][1] == pytest.approx(0.0277, abs=1e-4)
    assert by_id["a"][2] == pytest.approx(0.0554, abs=1e-4)
    assert by_id["b"][1] == 0.0


def test_load_kaf_and_evaluate_corpus():
    fixtures = os.environ["KEYFIND_FIXTURES"]
    items, failures = kf.load_kaf(os.path.join(fixtures, "kaf_b3.jsonl"))
    assert not failures
    assert len(items) == 4
    assert items[2].gold_extraction.serialize() == "Location"

    report = json.loads(
        kf.evaluate_corpus(os.path.join(fixtures, "d1.jsonl"), "reference-rules")
    )
    assert report["overall"]["extraction_accuracy"] == 1.0
    assert report["overall"]["judgment_accuracy"] == 1.0


def test_prompt_rendering():
    library = kf.PromptLibrary.load(str(kf.template_dir()))
    item = kf.EvalItem(
        id="x",
        question="Why?",
        task_type=kf.TaskType.ALPHABET_OPTION,
        answer_range=kf.AnswerRange.pairs([("A", "one"), ("B", "two")]),
    )
    prompt = library.render_question_prompt(item, "random-0-shot-restrict")
    assert "End your final answer with 'The answer is <answer>.'" in prompt
    assert "options A to B" in prompt

    extraction = library.render_extraction_prompt(
        item, kf.ModelResponse(item_id="x", text="The answer is (A).")
    )
    assert extraction.endswith("Key extracted answer:")
