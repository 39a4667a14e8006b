"""MovieLens-style CSV ingestion, sampling, rating mapping and train/test split."""

from __future__ import annotations

import csv
import math
import os
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import DatasetError, EmptyInputError, MissingColumnError, RatingRangeError
from .graph import ContextGraph, Interaction, InteractionType, NodeId

RATING_COLUMNS = ("userId", "movieId", "rating", "timestamp")
TAG_COLUMNS = ("userId", "movieId", "tag", "timestamp")
MOVIE_COLUMNS = ("movieId", "title", "genres")
NO_GENRES = "(no genres listed)"


@dataclass(frozen=True)
class RatingScale:
    low: float = 0.5
    high: float = 5.0

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"rating scale needs low < high, got {self.low}..{self.high}")

    def __contains__(self, value: float) -> bool:
        return self.low <= value <= self.high


@dataclass(frozen=True)
class RatingRecord:
    user_id: str
    movie_id: str
    rating: float
    timestamp: int


@dataclass(frozen=True)
class Movie:
    movie_id: str
    title: str
    genres: tuple[str, ...] = ()


@dataclass(frozen=True)
class SamplePlan:
    n_movies: int = 30
    keywords_per_movie: int = 5
    train_fraction: float = 0.7
    rng_seed: int = 42

    def __post_init__(self):
        if self.n_movies < 1:
            raise ValueError("n_movies must be at least 1")
        if self.keywords_per_movie < 0:
            raise ValueError("keywords_per_movie must be non-negative")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly between 0 and 1")


@dataclass(frozen=True)
class Sample:
    movies: list[str]
    users: list[str]
    ratings: list[RatingRecord]
    keywords: dict[str, list[str]] = field(default_factory=dict)


def user_node(user_id: str) -> NodeId:
    return f"u{user_id}"


def movie_node(movie_id: str) -> NodeId:
    return f"m{movie_id}"


def _reader(path, required):
    f = open(path, newline="", encoding="utf-8")
    reader = csv.DictReader(f)
    header = reader.fieldnames or []
    missing = [c for c in required if c not in header]
    if missing:
        f.close()
        raise MissingColumnError(f"missing column(s) {', '.join(missing)}", path)
    return f, reader


def load_ratings(path: str | os.PathLike, scale: RatingScale = RatingScale()) -> list[RatingRecord]:
    f, reader = _reader(path, RATING_COLUMNS)
    records = []
    with f:
        for row in reader:
            line = reader.line_num
            try:
                rating = float(row["rating"])
                timestamp = int(float(row["timestamp"]))
            except (TypeError, ValueError):
                raise DatasetError(f"unparseable row {row!r}", path, line) from None
            user, movie = (row["userId"] or "").strip(), (row["movieId"] or "").strip()
            if not user or not movie:
                raise DatasetError("empty userId or movieId", path, line)
            if rating not in scale:
                raise RatingRangeError(f"rating {rating} outside [{scale.low}, {scale.high}]", path, line)
            records.append(RatingRecord(user, movie, rating, timestamp))
    return records


def load_movies(path: str | os.PathLike) -> dict[str, Movie]:
    f, reader = _reader(path, MOVIE_COLUMNS)
    movies = {}
    with f:
        for row in reader:
            movie = (row["movieId"] or "").strip()
            if not movie:
                raise DatasetError("empty movieId", path, reader.line_num)
            genres = tuple(
                g.strip().lower()
                for g in (row["genres"] or "").split("|")
                if g.strip() and g.strip() != NO_GENRES
            )
            movies[movie] = Movie(movie, row["title"] or "", genres)
    return movies


def load_tags(path: str | os.PathLike) -> dict[str, Counter]:
    f, reader = _reader(path, TAG_COLUMNS)
    counts: dict[str, Counter] = defaultdict(Counter)
    with f:
        for row in reader:
            movie = (row["movieId"] or "").strip()
            tag = " ".join((row["tag"] or "").split()).lower()
            if not movie:
                raise DatasetError("empty movieId", path, reader.line_num)
            if tag:
                counts[movie][tag] += 1
    return dict(counts)


def keyword_candidates(
    tags: Mapping[str, Counter], movies: Mapping[str, Movie], keywords_per_movie: int = 5
) -> dict[str, list[tuple[str, int]]]:
    """Per movie ``(keyword, frequency)`` candidates, most frequent tags first.

    Movies with fewer distinct tags than ``keywords_per_movie`` are topped up
    with their genres (frequency 0). The result can stay shorter than asked.
    """
    result = {}
    for movie in sorted(set(tags) | set(movies)):
        counted = tags.get(movie, Counter())
        ranked = sorted(counted.items(), key=lambda kv: (-kv[1], kv[0]))
        if len(ranked) < keywords_per_movie and movie in movies:
            have = {k for k, _ in ranked}
            for genre in movies[movie].genres:
                if len(ranked) >= keywords_per_movie:
                    break
                if genre not in have:
                    ranked.append((genre, 0))
                    have.add(genre)
        result[movie] = ranked
    return result


def load_keywords(
    tags_path: str | os.PathLike | None,
    movies_path: str | os.PathLike | None,
    keywords_per_movie: int = 5,
) -> dict[str, list[tuple[str, int]]]:
    tags = load_tags(tags_path) if tags_path else {}
    movies = load_movies(movies_path) if movies_path else {}
    return keyword_candidates(tags, movies, keywords_per_movie)


def sample(
    records: Sequence[RatingRecord],
    keywords: Mapping[str, Sequence[tuple[str, int]]],
    plan: SamplePlan = SamplePlan(),
) -> Sample:
    if not records:
        raise EmptyInputError("no rating records to sample from")
    counts = Counter(r.movie_id for r in records)
    ordered = sorted(counts, key=lambda m: (-counts[m], _id_key(m)))
    chosen = ordered[: plan.n_movies]
    chosen_set = set(chosen)
    ratings = sorted(
        (r for r in records if r.movie_id in chosen_set),
        key=lambda r: (_id_key(r.user_id), _id_key(r.movie_id), r.timestamp),
    )
    users = sorted({r.user_id for r in ratings}, key=_id_key)
    picked = {}
    for movie in chosen:
        ranked = sorted(keywords.get(movie, ()), key=lambda kv: (-kv[1], kv[0]))
        picked[movie] = [k for k, _ in ranked[: plan.keywords_per_movie]]
    return Sample(sorted(chosen, key=_id_key), users, ratings, picked)


def rating_weight(rating: float, scale: RatingScale = RatingScale()) -> float:
    """Affine map of a native rating onto [-1, 1]."""
    if rating not in scale:
        raise RatingRangeError(f"rating {rating} outside [{scale.low}, {scale.high}]")
    return 2.0 * (rating - scale.low) / (scale.high - scale.low) - 1.0


def map_rating(record: RatingRecord, scale: RatingScale = RatingScale()) -> Interaction:
    """Turn a rating into the comment interaction that stands in for it."""
    w = rating_weight(record.rating, scale)
    return Interaction(
        user_node(record.user_id),
        movie_node(record.movie_id),
        InteractionType.COMMENT,
        polarity=1.0 if w >= 0 else -1.0,
        intensity=abs(w),
        timestamp=record.timestamp * 1000,
    )


def split(
    ratings: Iterable[RatingRecord], plan: SamplePlan = SamplePlan()
) -> tuple[list[RatingRecord], list[RatingRecord]]:
    """Per-user seeded split; each user keeps ceil(fraction * count) ratings for training."""
    by_user: dict[str, list[RatingRecord]] = defaultdict(list)
    for r in ratings:
        by_user[r.user_id].append(r)
    rng = random.Random(plan.rng_seed)
    train, test = [], []
    for user in sorted(by_user, key=_id_key):
        mine = sorted(by_user[user], key=lambda r: (_id_key(r.movie_id), r.timestamp, r.rating))
        rng.shuffle(mine)
        # guard against 0.7 * 10 == 7.000000000000001
        cut = math.ceil(round(plan.train_fraction * len(mine), 9))
        train.extend(mine[:cut])
        test.extend(mine[cut:])
    return train, test


def build_graph(
    train: Iterable[RatingRecord],
    movies: Iterable[str],
    keywords: Mapping[str, Sequence[str]],
    users: Iterable[str] = (),
    titles: Mapping[str, Movie] | None = None,
    scale: RatingScale = RatingScale(),
) -> ContextGraph:
    train = list(train)
    graph = ContextGraph()
    for movie in movies:
        title = titles[movie].title if titles and movie in titles else ""
        graph.add_asset(movie_node(movie), "root", title)
        for label in keywords.get(movie, ()):
            graph.tag(movie_node(movie), label)
    for user in sorted(set(users) | {r.user_id for r in train}, key=_id_key):
        graph.add_person(user_node(user))
    for r in train:
        graph.record_interaction(map_rating(r, scale))
    return graph


def write_test_csv(path: str | os.PathLike, test: Iterable[RatingRecord], scale: RatingScale = RatingScale()) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["user", "movie", "weight"])
        for r in test:
            writer.writerow([user_node(r.user_id), movie_node(r.movie_id), repr(rating_weight(r.rating, scale))])


def read_test_csv(path: str | os.PathLike) -> list[tuple[NodeId, NodeId, float]]:
    f, reader = _reader(path, ("user", "movie", "weight"))
    rows = []
    with f:
        for row in reader:
            try:
                weight = float(row["weight"])
            except (TypeError, ValueError):
                raise DatasetError(f"unparseable weight {row['weight']!r}", path, reader.line_num) from None
            if not -1.0 <= weight <= 1.0:
                raise RatingRangeError(f"weight {weight} outside [-1, 1]", path, reader.line_num)
            rows.append((row["user"], row["movie"], weight))
    return rows


@dataclass
class IngestResult:
    graph: ContextGraph
    sample: Sample
    train: list[RatingRecord]
    test: list[RatingRecord]


def ingest(
    ratings_path,
    movies_path=None,
    tags_path=None,
    plan: SamplePlan = SamplePlan(),
    scale: RatingScale = RatingScale(),
) -> IngestResult:
    """Full pipeline: load, sample, split and build the training graph."""
    records = load_ratings(ratings_path, scale)
    movies = load_movies(movies_path) if movies_path else {}
    tags = load_tags(tags_path) if tags_path else {}
    keywords = keyword_candidates(tags, movies, plan.keywords_per_movie)
    chosen = sample(records, keywords, plan)
    train, test = split(chosen.ratings, plan)
    graph = build_graph(train, chosen.movies, chosen.keywords, chosen.users, movies, scale)
    return IngestResult(graph, chosen, train, test)


def _id_key(value: str):
    # numeric ids sort numerically, anything else lexicographically after them
    return (0, int(value), "") if value.isdigit() else (1, 0, value)
