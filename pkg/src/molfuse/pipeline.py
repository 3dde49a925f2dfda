"""End-to-end model: encoders -> projector -> decoder stub.

The pipeline is a pure function of (parameters, molecule, modality mask):
identical inputs give identical outputs, so it is safe to call
concurrently for inference. Training mutates parameters and requires
exclusive access.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coproj import ModalityMask, Projector, UnifiedMoleculeTokens
from .encoders import GeometryEncoder, GraphEncoder, ModalityUnavailable, TokenEmbedder
from .lmstub.model import DecoderLM
from .lmstub.vocab import TextVocab
from .molio.molecule import Molecule
from .molio.selfies import SelfiesVocab
from .molio.structure import StructMatrices
from .numerics import Module, Tensor
from .rng import child_rng


@dataclass
class ModelDims:
    d1: int = 32
    d2: int = 32
    d3: int = 32
    levels: int = 3
    tau: float = 4.0
    proj_width: int = 64
    queries: int = 8
    heads: int = 4
    kernels: int = 16
    spd_clip: int = 8
    lm_blocks: int = 2
    lm_heads: int = 4
    lm_max_seq: int = 128
    use_relation_bias: bool = True
    use_modality_embeddings: bool = True


class PipelineModel(Module):
    def __init__(
        self,
        seed: int,
        dims: ModelDims,
        selfies_vocab: SelfiesVocab,
        text_vocab: TextVocab,
    ):
        rng = child_rng(seed, "init")
        self.embed_1d = TokenEmbedder(rng, len(selfies_vocab), dims.d1)
        self.encoder_2d = GraphEncoder(rng, dims.levels, dims.d2)
        self.encoder_3d = GeometryEncoder(rng, dims.levels, dims.d3, tau=dims.tau)
        self.projector = Projector(
            rng,
            dims={"1d": dims.d1, "2d": dims.d2, "3d": dims.d3},
            width=dims.proj_width,
            levels=dims.levels,
            queries=dims.queries,
            heads=dims.heads,
            kernel_count=dims.kernels,
            d_max=dims.spd_clip,
            use_relation_bias=dims.use_relation_bias,
            use_modality_embeddings=dims.use_modality_embeddings,
        )
        self.lm = DecoderLM(
            rng,
            vocab_size=len(text_vocab),
            width=dims.proj_width,
            blocks=dims.lm_blocks,
            heads=dims.lm_heads,
            max_seq=dims.lm_max_seq,
        )
        self._dims = dims
        self._selfies_vocab = selfies_vocab
        self._text_vocab = text_vocab

    @property
    def dims(self) -> ModelDims:
        return self._dims

    @property
    def selfies_vocab(self) -> SelfiesVocab:
        return self._selfies_vocab

    @property
    def text_vocab(self) -> TextVocab:
        return self._text_vocab

    # -- component parameter groups --------------------------------------------

    def encoder_parameters(self):
        names = ("embed_1d", "encoder_2d", "encoder_3d")
        return [p for n, p in self.named_parameters() if n.split(".")[0] in names]

    def projector_parameters(self):
        return [p for n, p in self.named_parameters() if n.startswith("projector.")]

    def lm_base_parameters(self):
        return [p for n, p in self.named_parameters() if n.startswith("lm.") and ".adapters." not in n]

    def lm_adapter_parameters(self):
        return [p for n, p in self.named_parameters() if n.startswith("lm.adapters.")]

    # -- forward ----------------------------------------------------------------

    def effective_mask(self, mol: Molecule, mask: ModalityMask) -> ModalityMask:
        """Drop requested modalities the molecule cannot provide."""
        active = set(mask.active)
        if "3d" in active and mol.coords is None:
            active.discard("3d")
        if not active:
            raise ModalityUnavailable(f"{mol.id}: no usable modality under mask {mask}")
        return ModalityMask(active)

    def unified_tokens(self, mol: Molecule, mask: ModalityMask | None = None) -> UnifiedMoleculeTokens:
        mask = self.effective_mask(mol, mask or ModalityMask.all())
        states = {}
        if "1d" in mask:
            ids = self._selfies_vocab.encode(mol.selfies)
            states["1d"] = self.embed_1d.encode(ids, self._dims.levels)
        if "2d" in mask:
            states["2d"] = self.encoder_2d.encode(mol)
        if "3d" in mask:
            states["3d"] = self.encoder_3d.encode(mol)
        struct = StructMatrices.from_molecule(mol)
        return self.projector.forward(states, struct, mask)

    def loss(
        self,
        mol: Molecule,
        instruction_ids: list[int],
        response_ids: list[int],
        mask: ModalityMask | None = None,
    ) -> Tensor:
        unified = self.unified_tokens(mol, mask)
        return self.lm.forward_loss(unified.tokens, instruction_ids, response_ids)

    def generate(
        self,
        mol: Molecule,
        instruction_ids: list[int],
        max_len: int = 48,
        mask: ModalityMask | None = None,
    ) -> list[int]:
        unified = self.unified_tokens(mol, mask)
        return self.lm.generate(unified.tokens, instruction_ids, max_len)

    def generate_text(
        self,
        mol: Molecule,
        instruction: str,
        max_len: int = 48,
        mask: ModalityMask | None = None,
    ) -> str:
        ids = self._text_vocab.encode(instruction)
        out = self.generate(mol, ids, max_len=max_len, mask=mask)
        return self._text_vocab.decode(out)

    def parameter_hash(self, params=None) -> int:
        """FNV-1a over the raw bytes of the given (default: all) parameters."""
        from .rng import fnv1a64

        params = self.parameters() if params is None else params
        digest = 0xCBF29CE484222325
        for p in params:
            digest ^= fnv1a64(p.data.tobytes())
            digest = (digest * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
        return digest


def build_model(
    seed: int,
    dims: ModelDims,
    molecules: list[Molecule],
    extra_texts: list[str] = (),
) -> PipelineModel:
    """Construct a pipeline whose vocabularies cover the given corpus."""
    from .lmstub.tasks import vocabulary_texts
    from .molio.selfies import build_vocab

    selfies_vocab = build_vocab(m.selfies for m in molecules)
    texts = vocabulary_texts(molecules) + list(extra_texts)
    text_vocab = TextVocab.from_texts(texts)
    return PipelineModel(seed, dims, selfies_vocab, text_vocab)
