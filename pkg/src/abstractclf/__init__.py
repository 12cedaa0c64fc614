"""Seven-class classification of scientific abstracts.

Four sub-models (embedding, embedding + LDA topics, sentence-level and
TF-IDF softmax regression) combined by majority vote.
"""

__version__ = "0.1.0"
