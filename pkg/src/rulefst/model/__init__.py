from .seq2seq import ModelConfig, Seq2SeqTransformer
from .training import Adam, Checkpoint, TrainSpec, evaluate_loss, make_batch, token_accuracy, train
from .decoding import beam_decode, beam_search, greedy_decode, model_step_fn
from .gradcheck import grad_check, tiny_model_for_check

__all__ = [
    "Adam",
    "Checkpoint",
    "ModelConfig",
    "Seq2SeqTransformer",
    "TrainSpec",
    "beam_decode",
    "beam_search",
    "evaluate_loss",
    "grad_check",
    "greedy_decode",
    "make_batch",
    "model_step_fn",
    "tiny_model_for_check",
    "token_accuracy",
    "train",
]
