# coding: utf-8

# # Two engines behind one URL
#
# The service answers the same request with either the graph engine or the
# K-NN baseline, picked by a query parameter. Replaying test-set users against
# both shows the cost of correlating against every user on each request.

from pathlib import Path

from samrec import RatingScale, SamplePlan, ingest
from samrec.evaluation import latency_bench, request_stream
from samrec.ingest import rating_weight
from samrec.service import RecommendationService, ServiceConfig, running

DATA = Path(__file__).resolve().parent.parent / "tests" / "data" / "ml-100k"
SCALE = RatingScale(1, 5)

result = ingest(DATA / "ratings.csv", DATA / "movies.csv", DATA / "tags.csv", SamplePlan(), SCALE)
test = [(f"u{r.user_id}", f"m{r.movie_id}", rating_weight(r.rating, SCALE)) for r in result.test]

streams = {engine: request_stream(test, engine, limit=10, max_requests=300) for engine in ("sam", "knn")}
print(streams["sam"][0])
print(streams["knn"][0])


# Sequential replay, the first 50 requests of each stream treated as warmup.

service = RecommendationService(result.graph, ServiceConfig(port=0))
with running(service) as url:
    reports = latency_bench(url, streams, warmup=50)

for name, rep in reports.items():
    print(f"{name}: mean {rep.mean / 1000:.2f} ms  median {rep.median / 1000:.2f} ms  "
          f"p95 {rep.p95 / 1000:.2f} ms  failures {rep.failures}")
