"""Review rating prediction from review text, category, time and reviewer/item identity."""

from .corpus import Review, Dataset, CorpusStats, parse_reviews, read_reviews, split, compute_stats
from .textpipe import (Vocabulary, normalize_and_tokenize, remove_stopwords, stem_token,
                       preprocess_review, build_vocabulary, encode_fixed)
from .features import (FeatureContext, EncodedExample, onehot_category, normalize_time,
                       build_context, bow_vector, encode_example)
from .numerics import AdamHyper, AdamState, adam_step, grad_check, mse_loss, softmax
from .baselines import NbModel, LogRegModel, nb_fit, nb_predict, lr_fit, lr_predict
from .dnn import (DnnArch, DnnModel, DnnTrainConfig, LossCurve, LstmParams, dnn_forward,
                  dnn_predict, embed_lookup, lstm_forward, train_dnn)
from .evaluation import Metrics, compare_models, evaluate_model, mse_metric

__version__ = "0.1.0"
