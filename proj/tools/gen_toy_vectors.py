#!/usr/bin/env python3
"""Writes fixtures/vectors_toy.txt and fixtures/stopwords.txt.

Each token is a sparse mix over 16 interpretable axes. The table is small
on purpose: it only has to place the fixture items and class labels in a
space where the intended links have high cosine similarity.
"""
import pathlib
import random
import sys

AXES = ["sport", "leisure", "event", "culture", "nature", "route", "town", "view",
        "water", "food", "shop", "relax", "night", "motor", "golf", "theme"]

TOKENS = {
    # class labels
    "viewpoints": {"view": 1.0, "nature": 0.3, "route": 0.2},
    "viewpoint": {"view": 1.0, "nature": 0.3, "route": 0.2},
    "nature": {"nature": 1.0, "view": 0.2},
    "towns": {"town": 1.0, "culture": 0.2},
    "town": {"town": 1.0, "culture": 0.2},
    "culture": {"culture": 1.0, "town": 0.2},
    "cultural": {"culture": 1.0, "town": 0.2},
    "events": {"event": 1.0},
    "event": {"event": 1.0},
    "leisure": {"leisure": 1.0, "relax": 0.2},
    "routes": {"route": 1.0, "nature": 0.3, "view": 0.2},
    "route": {"route": 1.0, "nature": 0.3, "view": 0.2},
    "sports": {"sport": 1.0},
    "sport": {"sport": 1.0},
    "beach": {"water": 0.7, "nature": 0.5, "leisure": 0.4, "relax": 0.3},
    "relax": {"relax": 1.0, "leisure": 0.4},
    "shop": {"shop": 1.0, "leisure": 0.4, "town": 0.2},
    "nightlife": {"night": 1.0, "leisure": 0.4, "event": 0.3},
    "theme": {"theme": 1.0, "leisure": 0.5},
    "park": {"theme": 0.6, "leisure": 0.4, "nature": 0.4},
    "gastro": {"food": 1.0, "culture": 0.3, "leisure": 0.3},
    "food": {"food": 1.0, "leisure": 0.3},
    "golf": {"golf": 1.0, "sport": 0.5},
    "motor": {"motor": 1.0, "sport": 0.5},
    "water": {"water": 1.0, "sport": 0.3, "nature": 0.3},
    "football": {"sport": 0.7, "event": 0.5, "golf": -0.1},
    "museums": {"culture": 1.0, "town": 0.2},
    "museum": {"culture": 1.0, "town": 0.2},
    "concerts": {"event": 0.9, "night": 0.3, "culture": 0.3},
    "adventure": {"sport": 0.7, "nature": 0.6},
    # fixture item vocabulary
    "bungee": {"sport": 0.8, "nature": 0.5},
    "jumping": {"sport": 0.8, "nature": 0.3},
    "service": {"leisure": 0.1},
    "tavern": {"food": 0.8, "leisure": 0.4, "culture": 0.3},
    "serves": {"food": 0.4},
    "traditional": {"culture": 0.7, "food": 0.2, "town": 0.3},
    "ancient": {"culture": 0.8},
    "history": {"culture": 1.0},
    "discount": {"shop": 0.3},
    "callaway": {"golf": 1.0},
    "clubs": {"golf": 0.6, "night": 0.2},
    "comic": {"event": 0.7, "leisure": 0.3},
    "con": {"event": 0.6},
    "free": {"leisure": 0.1},
    "pint": {"night": 0.7, "leisure": 0.5},
    "pub": {"night": 0.8, "leisure": 0.5, "food": 0.2},
    "pizza": {"food": 0.9, "leisure": 0.5},
    "hut": {"food": 0.3},
    "voucher": {"shop": 0.7, "leisure": 0.3},
    "sephora": {"shop": 1.0, "leisure": 0.3},
    "shopping": {"shop": 1.0, "leisure": 0.4},
    "new": {"leisure": 0.05},
    "mall": {"shop": 1.0, "leisure": 0.4, "town": 0.2},
    "lessons": {"sport": 0.3, "leisure": 0.1},
    "great": {"leisure": 0.1},
    "meals": {"food": 1.0, "leisure": 0.3},
    "tasty": {"food": 0.8},
    "medieval": {"culture": 0.9, "event": 0.3, "town": 0.3},
    "fair": {"event": 0.8, "culture": 0.3},
    "day": {"leisure": 0.05},
    "snorkeling": {"water": 1.0, "sport": 0.5, "nature": 0.3},
    "fish": {"water": 0.7, "nature": 0.5},
    "main": {"town": 0.1},
    "nightclubs": {"night": 1.0, "leisure": 0.4, "event": 0.3},
    "city": {"town": 0.8, "culture": 0.2},
    "rest": {"relax": 0.9, "leisure": 0.3},
    "relaxation": {"relax": 1.0, "leisure": 0.4},
    "spa": {"relax": 1.0, "leisure": 0.5},
    "surfing": {"water": 0.9, "sport": 0.6},
    "take": {"leisure": 0.05},
    "trip": {"route": 0.6, "leisure": 0.3},
    "hot": {"leisure": 0.05},
    "air": {"view": 0.4, "nature": 0.2},
    "balloon": {"view": 0.8, "sport": 0.3, "leisure": 0.3},
    "try": {"leisure": 0.05},
    "go": {"leisure": 0.05},
    "karts": {"motor": 1.0, "sport": 0.5},
    "friends": {"leisure": 0.2},
    "scuba": {"water": 1.0, "sport": 0.5},
    "diving": {"water": 1.0, "sport": 0.5},
    "spearfishing": {"water": 1.0, "sport": 0.6, "nature": 0.2},
    "pro": {"sport": 0.3},
    "watch": {"event": 0.2},
    "fc": {"sport": 0.6, "event": 0.4},
    "porto": {"town": 0.3, "sport": 0.3},
    "match": {"sport": 0.8, "event": 0.6},
    "sl": {"sport": 0.5, "event": 0.3},
    "benfica": {"sport": 0.8, "event": 0.5},
    "sporting": {"sport": 0.9, "event": 0.4},
    "cp": {"sport": 0.3},
    "live": {"event": 0.8, "night": 0.2},
    "concert": {"event": 0.9, "night": 0.3, "culture": 0.3},
    "mastodon": {"event": 0.6, "night": 0.3},
    "motogp": {"motor": 1.0, "sport": 0.6, "event": 0.4},
    "race": {"motor": 0.8, "sport": 0.6, "event": 0.3},
    "drive": {"motor": 0.8, "route": 0.2},
    "f1": {"motor": 1.0, "sport": 0.5},
    "racecar": {"motor": 1.0, "sport": 0.4},
    "visiting": {"leisure": 0.2, "route": 0.1},
    "disneyland": {"theme": 1.0, "leisure": 0.6},
    "get": {"leisure": 0.05},
}

# Extra vocabulary so the table behaves like a (tiny) general-purpose one.
EXTRA = {
    "sport": "athletics cycling running marathon tennis swimming climbing skiing hiking yoga fitness gym",
    "leisure": "fun holiday vacation weekend entertainment hobby games cinema bowling",
    "event": "festival show exhibition parade ceremony gala tournament premiere",
    "culture": "art gallery heritage architecture theatre opera cathedral monument castle palace",
    "nature": "forest mountain river lake garden wildlife valley waterfall countryside",
    "route": "tour path itinerary walk excursion journey road",
    "town": "village square downtown street neighbourhood market",
    "view": "panorama lookout sunset scenic skyline",
    "water": "boat sailing kayak canoe harbour island ocean sea",
    "food": "restaurant dinner lunch wine tapas seafood cuisine bakery brunch",
    "shop": "store boutique outlet souvenir fashion",
    "relax": "massage sauna wellness retreat resort",
    "night": "bar cocktail disco dance club party",
    "motor": "car motorbike karting rally circuit",
    "golf": "putting course caddie tee",
    "theme": "rollercoaster attraction amusement waterpark zoo",
}

STOPWORDS = """a an the that this these those with your our my their his her its in on at for of to and or
but by from as is are was were be been it we you they he she i me us them into about over under up down out""".split()


def main(root: pathlib.Path) -> None:
    rng = random.Random(20240611)
    table = {}
    for token, mix in TOKENS.items():
        table[token] = [mix.get(axis, 0.0) for axis in AXES]
    for axis, words in EXTRA.items():
        for word in words.split():
            if word in table:
                continue
            vec = [0.0] * len(AXES)
            vec[AXES.index(axis)] = 1.0
            vec[rng.randrange(len(AXES))] += round(rng.uniform(0.05, 0.25), 2)
            table[word] = vec
    lines = [f"{len(table)} {len(AXES)}"]
    for token in sorted(table):
        lines.append(token + " " + " ".join(f"{x:.4f}" for x in table[token]))
    (root / "vectors_toy.txt").write_text("\n".join(lines) + "\n")
    (root / "stopwords.txt").write_text("\n".join(STOPWORDS) + "\n")


if __name__ == "__main__":
    main(pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parent.parent / "fixtures"))
