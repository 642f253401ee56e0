"""Pretrained-encoder adapter, exercised with a tiny randomly initialised BERT."""
import pytest
import torch

pytest.importorskip("transformers")
pytest.importorskip("tokenizers")

from speakerid.core import NameMention
from speakerid.encode import PretrainedEncoder, assemble_window, average_subwords, encode_window, pool
from speakerid.errors import EncoderFailure
from speakerid.model import SpeakerIDModel

VOCAB = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "good", "morning", "i", "am", "john",
         "ber", "##man", "thanks", "sarah", ",", ".", "and", "welcome", "back", "it", "is",
         "cam", "##ero", "##ta"]


@pytest.fixture(scope="module")
def tiny_model_dir(tmp_path_factory):
    from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors
    from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

    d = tmp_path_factory.mktemp("tiny-bert")
    vocab = {w: i for i, w in enumerate(VOCAB)}
    tok = Tokenizer(models.WordPiece(vocab, unk_token="[UNK]"))
    tok.normalizer = normalizers.Lowercase()
    tok.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    tok.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]", special_tokens=[("[CLS]", 2), ("[SEP]", 3)])
    fast = PreTrainedTokenizerFast(tokenizer_object=tok, unk_token="[UNK]", pad_token="[PAD]",
                                   cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]",
                                   model_max_length=64)
    fast.save_pretrained(d)
    torch.manual_seed(0)
    BertModel(BertConfig(vocab_size=len(VOCAB), hidden_size=16, num_hidden_layers=1,
                         num_attention_heads=2, intermediate_size=32,
                         max_position_embeddings=32)).save_pretrained(d)
    return str(d)


@pytest.fixture(scope="module")
def encoder(tiny_model_dir):
    enc = PretrainedEncoder(tiny_model_dir)
    enc.eval()
    return enc


def test_dimensions_and_budget(encoder):
    assert encoder.dim == 16
    assert encoder.max_subwords == 28


def test_word_alignment(encoder):
    tokens = ["I", "am", "John", "Berman."]
    sub, align = encoder.encode(tokens)
    # cls/sep dropped; "berman." -> ber ##man .
    assert align == [0, 1, 2, 3, 3, 3]
    assert encoder.count_subwords(tokens) == 6
    words = average_subwords(sub, align, 4)
    assert torch.allclose(words[3], sub[3:6].mean(0))
    assert torch.allclose(words[:3], sub[:3])


def test_pad_token_maps_to_tokenizer_pad(encoder):
    _, align = encoder.encode(["<pad>", "welcome", "back"])
    assert align == [0, 1, 2]


def test_encode_and_pool(encoder, table1):
    t, _ = table1
    cw = assemble_window(t, NameMention(1, 1, 1, "John,"))
    with torch.no_grad():
        tm = encode_window(cw, encoder)
        em = pool(cw, tm)
    assert tm.vectors.shape == (sum(tm.window.lengths), 16)
    assert em.r_n.shape == (16,)


def test_model_with_pretrained_encoder(tiny_model_dir, table1):
    t, _ = table1
    model = SpeakerIDModel("single", {"kind": "pretrained", "path": tiny_model_dir}, hidden=8)
    cw = assemble_window(t, NameMention(1, 1, 1, "John,"))
    with torch.no_grad():
        (scores,) = model(cw)
    assert all(0.0 < p < 1.0 for p in scores)


def test_missing_checkpoint(tmp_path):
    with pytest.raises(EncoderFailure):
        PretrainedEncoder(str(tmp_path / "nothing-here"))
