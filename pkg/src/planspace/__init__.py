"""planspace: embed floor plans in a low-dimensional space whose Euclidean
distances reproduce externally supplied pairwise similarity scores, then
search, cluster, insert and prune over the embedding."""

__version__ = "0.1.0"
