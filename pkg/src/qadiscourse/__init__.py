"""Discourse relations as question-answer pairs: targets, questions, metrics, baseline parser."""

__version__ = "0.1.0"

from .grammar import (AUXILIARIES, CATALOG, ComposedQuestion, EmptyBody, NoPrefixMatch,
                      canonical_label, compose_question, get_prefix, parse_question,
                      prefix_catalog)
from .model import (GOLD, POS, SYSTEM, AnnotationSet, Direction, Grammaticality, PDTBRelation,
                    QAPair, QuestionPrefix, Source, TaggedSentence, Token)
from .targets import ConnectiveLexicon, Segment, extract_targets, segment_sentence
from .metrics import (AlignmentResult, MetricsReport, align_pdtb, align_qa_sets, compute_iaa,
                      iou, lqa_accuracy, prefix_accuracy, qa_token_bag, uqa_scores)
