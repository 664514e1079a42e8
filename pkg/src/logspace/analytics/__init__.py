from .dbscan import NOISE, dbscan, default_eps
from .kmeans import ClusterAssignment, elbow, kmeans
from .knn import KNNResult, knn_classify
from .matrix import DistanceMatrix, pairwise_matrix
from .mds import Embedding2D, mmds, raw_stress
from .temporal import binned_centroids, clock_bins, hour_histogram, split_id, subsequences

__all__ = [
    "NOISE", "ClusterAssignment", "DistanceMatrix", "Embedding2D", "KNNResult",
    "binned_centroids", "clock_bins", "dbscan", "default_eps", "elbow",
    "hour_histogram", "kmeans", "knn_classify", "mmds", "pairwise_matrix",
    "raw_stress", "split_id", "subsequences",
]
