"""Regenerate assets/mini_corpus.jsonl and assets/keywords.txt.

Two synthetic topics: astronomy (positive, 30% of every split) and cooking.
Documents mix topic words with shared filler, and a fraction of each class
borrows vocabulary from the other topic so keyword matching is imperfect.
"""

import json
import random
from pathlib import Path

SEED = 20240611
ROOT = Path(__file__).resolve().parent.parent

KEYWORDS = [
    "telescope", "galaxy", "orbit", "planet", "comet",
    "nebula", "asteroid", "star", "astronomer", "eclipse",
]
ASTRONOMY = KEYWORDS + [
    "moon", "lunar", "solar", "cosmic", "redshift", "spectrum", "observatory",
    "meteor", "supernova", "gravity", "crater", "constellation", "light",
    "universe", "celestial", "dwarf", "cluster", "horizon", "sky", "lens",
    "mirror", "infrared", "radio", "signal", "dust", "ring", "satellite",
    "mission", "probe", "launch",
]
COOKING = [
    "recipe", "oven", "flour", "butter", "garlic", "onion", "simmer", "saucepan",
    "salt", "pepper", "roast", "bake", "dough", "knife", "skillet", "broth",
    "herb", "basil", "tomato", "lemon", "sugar", "whisk", "batter", "grill",
    "kitchen", "chef", "dinner", "spice", "cheese", "pasta", "vinegar", "olive",
    "fry", "stew", "bread", "yeast", "cream", "dish", "taste", "plate",
]
FILLER = [
    "the", "a", "and", "of", "to", "in", "is", "it", "for", "on", "with", "as",
    "this", "that", "was", "we", "at", "by", "from", "new", "night", "time",
    "long", "first", "small", "large", "early", "late", "people", "week",
    "during", "after", "before", "around", "about", "really", "quite", "still",
    "group", "local", "club", "report", "photo", "guide", "notes", "tips",
]

N_DOCS = {"train_unlabeled": 240, "validation_unlabeled": 80, "test_labeled": 80}
PRIOR = 0.3


def document(rng, positive):
    own, other = (ASTRONOMY, COOKING) if positive else (COOKING, ASTRONOMY)
    # some documents lean on the other topic's vocabulary
    crossover = 0.35 if rng.random() < 0.2 else 0.05
    length = rng.randint(18, 40)
    words = []
    for _ in range(length):
        u = rng.random()
        if u < 0.38:
            words.append(rng.choice(own))
        elif u < 0.38 + crossover * 0.4:
            words.append(rng.choice(other))
        else:
            words.append(rng.choice(FILLER))
    return " ".join(words).capitalize() + "."


def main():
    rng = random.Random(SEED)
    docs = []
    for split, n in N_DOCS.items():
        n_pos = round(PRIOR * n)
        labels = [1] * n_pos + [-1] * (n - n_pos)
        rng.shuffle(labels)
        for label in labels:
            docs.append({"split": split, "label": label, "text": document(rng, label == 1)})
    lines = []
    for i, d in enumerate(docs):
        record = {"id": f"d{i:03d}", "text": d["text"], "split": d["split"]}
        record["label"] = d["label"]
        lines.append(json.dumps(record))
    (ROOT / "assets" / "mini_corpus.jsonl").write_text("\n".join(lines) + "\n")
    (ROOT / "assets" / "keywords.txt").write_text(
        "# relevant keywords for the astronomy topic\n" + "\n".join(KEYWORDS) + "\n"
    )


if __name__ == "__main__":
    main()
