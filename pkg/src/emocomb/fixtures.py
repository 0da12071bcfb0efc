"""Synthetic corpora for tests and desk-scale experiments."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import Sample
from .emoji_text import default_table

# Common emojis, all present in the bundled table.
POOL = (
    "😂 ❤ 😍 😭 🔥 💯 🙏 😊 👍 💕 😘 🎉 💀 🙌 👏 😎 💪 ✨ 🤔 😴 "
    "🌞 🌊 🍕 🍺 🏀 ⚽ 🎶 🎂 🐶 🐱 🌹 🎄 🌧 ❄ 🚗 ✈ 📚 💻 💰 👀 "
    "😡 😢 😅 🤣 😱 😋 🤗 💙 💚 💜"
).split()

TOPIC_STEMS = ("sun beach game food party rain song dog work trip cake car book snow gym "
               "movie class bus coffee dance").split()

FILLER = ("the a so and just really my this is it to of in for on with you "
          "i we today got lol omg time day love like").split()


def separable_samples(n: int = 5000, n_types: int = 8, seed: int = 0):
    """Each context type always pairs with its own single emoji.

    Labels are one-hot, so a perfect model has zero cross-entropy.
    Returns (samples, k) with emoji ids 0..n_types-1.
    """
    rng = random.Random(seed)
    samples = []
    for _ in range(n):
        t = rng.randrange(n_types)
        samples.append(Sample(f"ctx{t} some shared words", (t,)))
    return samples, n_types


@dataclass(frozen=True)
class Topic:
    words: tuple[str, ...]
    combos: tuple[tuple[str, ...], ...]
    weights: tuple[float, ...]


def emoji_pool(size: int = 200, seed: int = 0):
    """Single-scalar emojis drawn from the bundled table (plus the POOL favourites)."""
    singles = sorted(e for e in default_table().entries if len(e) == 1)
    rng = random.Random(seed)
    extra = [e for e in rng.sample(singles, min(size, len(singles))) if e not in POOL]
    return list(POOL) + extra[:max(0, size - len(POOL))]


def make_topics(n_topics: int = 30, seed: int = 0, words_per_topic: int = 8,
                palette_sizes=(1, 2, 4, 8, 16, 30), n_combos: int = 12,
                length_weights=(0.7, 0.15, 0.15), repeat_rate=(0.0, 0.9, 0.3),
                max_attempts: int = 500):
    """Topics with their own words and a Zipf-weighted menu of emoji combinations.

    Palette sizes cycle from one emoji (contexts that pin down the answer)
    to thirty (vague ones).  ``repeat_rate[L-1]`` is the chance that a
    length-L combination is one emoji repeated, as in 😂😂.  Small palettes
    cannot fill the menu, so they burn all ``max_attempts`` draws; changing
    it reshuffles every later topic.
    """
    rng = random.Random(seed)
    pool = emoji_pool(seed=seed)
    topics = []
    for t in range(n_topics):
        words = tuple(f"{w}{t}" for w in rng.sample(TOPIC_STEMS, words_per_topic))
        size = palette_sizes[t % len(palette_sizes)]
        palette = rng.sample(pool, size)
        combos = []
        for _attempt in range(max_attempts):
            if len(combos) == n_combos:
                break
            length = rng.choices((1, 2, 3), length_weights)[0]
            if length > 1 and rng.random() < repeat_rate[length - 1]:
                c = (rng.choice(palette),) * length
            elif length <= size:
                c = tuple(rng.sample(palette, length))
            else:
                continue
            if c not in combos:
                combos.append(c)
        weights = tuple(1.0 / (r + 1) for r in range(len(combos)))
        topics.append(Topic(words, tuple(combos), weights))
    return topics


def topic_corpus(n_posts: int = 12000, seed: int = 0, n_topics: int = 30,
                 topic_word_rate: float = 0.5):
    """Raw posts (with URLs, mentions and hashtags sprinkled in) from random topics."""
    topics = make_topics(n_topics, seed)
    rng = random.Random(seed + 1)
    posts = []
    for _ in range(n_posts):
        topic = rng.choice(topics)
        parts = []
        for _clause in range(rng.choice((1, 1, 2))):
            words = [rng.choice(topic.words) if rng.random() < topic_word_rate
                     else rng.choice(FILLER) for _ in range(rng.randint(3, 7))]
            combo = rng.choices(topic.combos, topic.weights)[0]
            if rng.random() < 0.2:
                words.append("@friend")
            if rng.random() < 0.1:
                words.append("https://t.co/abc")
            parts.append(" ".join(words) + " " + "".join(combo))
        if rng.random() < 0.1:
            parts.append("#mood")
        posts.append(" ".join(parts))
    return posts


# Six posts whose expected samples are traced by hand in the tests.
HAND_TRACED_POSTS = (
    "good night 😴😴 see you 👋",
    "😂😂😂😂 lol",
    "nice one 👍🏽",
    "love this https://t.co/x @bob #mood 😍",
    "no emojis here",
    "❤️🎉 party time",
)
