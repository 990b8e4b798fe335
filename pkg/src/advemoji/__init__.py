"""Zero-word-perturbation adversarial attacks via emoji affix sequences.

The engine flips black-box text classifiers by prepending and appending
sentiment-consistent emoji sequences, leaving the original text
byte-for-byte untouched, and learns a candidate-ranking policy (supervised
pretraining followed by REINFORCE) to keep oracle query counts low.
"""

from .attack import (AttackConfig, AttackResult, CandidatePair,
                     adversarial_loss, attack, concat_adversarial,
                     length_penalty, perturbation_rate,
                     sentiment_consistency, stealthiness)
from .bench import (BenchmarkReport, Example, emit_report, load_dataset,
                    run_benchmark)
from .errors import (AbstentionError, AdvemojiError, AttackError,
                     CheckpointError, DatasetError, LexiconError, OracleError,
                     ParseError, ProtocolError)
from .lexicon import (EmojiLexicon, EmojiSequence, EmojiToken,
                      SequenceSpaceConfig, default_lexicon, load_lexicon,
                      load_lexicon_file, parse_emoji_tokens,
                      sentiment_subspace, sequence_space_size,
                      validate_sequence)
from .oracles import (HttpClassifier, LlmClassifier, NaiveBayesClassifier,
                      Prediction, QueryLedger, http_classify_adapter,
                      label_coarsening, llm_classify_adapter,
                      sentiment_of_sequence, train_baseline)
from .policy import (Policy, RewardTrace, TrainConfig, Vocabulary,
                     build_vocabulary, combined_loss, elp_transform,
                     load_policy, modality_mask, random_candidates,
                     rank_candidates, reward, rl_train, sample_sequence,
                     save_policy, smooth_reward, supervised_pretrain)

__version__ = "0.1.0"
