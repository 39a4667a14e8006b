# coding: utf-8

# # Rating prediction on the bundled MovieLens sample
#
# Take the 30 most-rated movies, split each user's ratings 70/30, build the
# graph from the training part and predict the held-out ratings. The hybrid
# graph + CF predictor is compared with a plain user-based K-NN.

import time
from pathlib import Path

import numpy as np

from samrec import RatingScale, SamplePlan, ingest
from samrec.evaluation import evaluate, format_reports, knn_predictor, sam_predictor
from samrec.ingest import rating_weight

DATA = Path(__file__).resolve().parent.parent / "tests" / "data" / "ml-100k"
SCALE = RatingScale(1, 5)  # this release uses whole stars

result = ingest(DATA / "ratings.csv", DATA / "movies.csv", DATA / "tags.csv", SamplePlan(), SCALE)
s = result.sample
print(f"{len(s.movies)} movies, {len(s.users)} users, {len(s.ratings)} ratings "
      f"({len(result.train)} train / {len(result.test)} test)")
print("keywords of the most rated movie:", s.keywords[s.movies[0]])


# Ratings become relevance weights on [-1, 1].

print({r: round(rating_weight(r, SCALE), 3) for r in (1, 2, 3, 4, 5)})


test = [(f"u{r.user_id}", f"m{r.movie_id}", rating_weight(r.rating, SCALE)) for r in result.test]

t0 = time.perf_counter()
sam = evaluate(sam_predictor(result.graph), test)
t1 = time.perf_counter()
knn = evaluate(knn_predictor(result.graph, 10), test)
t2 = time.perf_counter()
print(format_reports({"sam": sam, "knn": knn}))
print(f"sam {t1 - t0:.1f}s, knn {t2 - t1:.1f}s")
print("where the hybrid scores came from:", dict(sam.per_source_counts))


# ## Why the hybrid lands where it does
#
# Each neighbour's signal is divided by (neighbours + 1), so a movie the user
# has not rated mostly hears faint echoes through its keywords. Predictions
# bunch up near zero while the truth spreads over the whole scale.

preds = np.array([sam_predictor(result.graph)(p, a).value for p, a, _ in test])
truth = np.array([g for _, _, g in test])
print("prediction spread:", np.percentile(preds, [5, 50, 95]).round(3))
print("truth spread:     ", np.percentile(truth, [5, 50, 95]).round(3))


# Scored on the training pairs instead, the direct term dominates and the
# error collapses. Keep this in mind when comparing with published numbers.

train = [(f"u{r.user_id}", f"m{r.movie_id}", rating_weight(r.rating, SCALE)) for r in result.train]
print(format_reports({"sam/train": evaluate(sam_predictor(result.graph), train)}))
