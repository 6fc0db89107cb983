"""Residual multi-head graph attention network over sentence graphs.

Architecture: two attention layers, a residual block of three more
attention layers (input added back before the third), global average
pooling over nodes, dropout, and a dense softmax head for the four
document classes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tape, Tensor
from .graphs import DocumentGraph
from .rng import split_rng

N_CLASSES = 4
ACTIVATIONS = ("elu", "identity")
MERGE_MODES = ("concat", "average")


@dataclass(frozen=True)
class GatLayerConfig:
    in_dim: int
    out_dim_per_head: int
    heads: int = 4
    leaky_slope: float = 0.2
    merge: str = "concat"
    activation: str = "elu"

    def __post_init__(self) -> None:
        if self.in_dim < 1 or self.out_dim_per_head < 1:
            raise ValueError("layer dimensions must be positive")
        if self.heads < 1:
            raise ValueError("a layer needs at least one head")
        if self.merge not in MERGE_MODES:
            raise ValueError(f"unknown merge mode: {self.merge!r}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation: {self.activation!r}")

    @property
    def width(self) -> int:
        if self.merge == "concat":
            return self.heads * self.out_dim_per_head
        return self.out_dim_per_head


@dataclass
class GatHeadParams:
    """One attention head: projection ``w`` (in x out) and attention
    vector ``a`` (2*out x 1, source half first)."""

    w: Tensor
    a: Tensor


@dataclass
class GatLayerParams:
    config: GatLayerConfig
    heads: list[GatHeadParams]


@dataclass(frozen=True)
class ModelConfig:
    """Hyperparameters of the full classifier.

    The first layer concatenates its heads (width heads * hidden/heads);
    the remaining four layers average theirs, so every width after the
    first layer stays at ``hidden_width`` and the residual addition is
    well-formed. Width mismatches fail here, at construction.
    """

    in_dim: int
    hidden_width: int = 64
    heads: int = 4
    leaky_slope: float = 0.2
    activation: str = "elu"
    dropout_keep: float = 0.5

    def __post_init__(self) -> None:
        if self.in_dim < 1 or self.hidden_width < 1:
            raise ValueError("model dimensions must be positive")
        if self.heads < 1:
            raise ValueError("need at least one attention head")
        if self.hidden_width % self.heads != 0:
            raise ValueError(
                f"hidden_width {self.hidden_width} must be divisible by heads {self.heads}"
            )
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation: {self.activation!r}")
        if not 0.0 < self.dropout_keep <= 1.0:
            raise ValueError(f"dropout_keep must be in (0, 1], got {self.dropout_keep}")

    def layer_configs(self) -> list[GatLayerConfig]:
        d = self.hidden_width
        first = GatLayerConfig(
            in_dim=self.in_dim,
            out_dim_per_head=d // self.heads,
            heads=self.heads,
            leaky_slope=self.leaky_slope,
            merge="concat",
            activation=self.activation,
        )
        rest = [
            GatLayerConfig(
                in_dim=d,
                out_dim_per_head=d,
                heads=self.heads,
                leaky_slope=self.leaky_slope,
                merge="average",
                activation=self.activation,
            )
            for _ in range(4)
        ]
        return [first] + rest


@dataclass
class ResidualGatModel:
    """All learnable parameters plus the architecture configuration."""

    config: ModelConfig
    gat1: GatLayerParams
    gat2: GatLayerParams
    block: list[GatLayerParams]
    head_w: Tensor
    head_b: Tensor

    def parameters(self) -> list[Tensor]:
        params: list[Tensor] = []
        for layer in (self.gat1, self.gat2, *self.block):
            for head in layer.heads:
                params.extend((head.w, head.a))
        params.extend((self.head_w, self.head_b))
        return params

    def named_parameters(self) -> dict[str, Tensor]:
        names = ["gat1", "gat2", "block1", "block2", "block3"]
        out: dict[str, Tensor] = {}
        for name, layer in zip(names, (self.gat1, self.gat2, *self.block)):
            for k, head in enumerate(layer.heads):
                out[f"{name}.h{k}.w"] = head.w
                out[f"{name}.h{k}.a"] = head.a
        out["head.w"] = self.head_w
        out["head.b"] = self.head_b
        return out


def _uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def _init_layer(rng: np.random.Generator, config: GatLayerConfig, name: str) -> GatLayerParams:
    heads = []
    d = config.out_dim_per_head
    for k in range(config.heads):
        w = ad.parameter(_uniform(rng, config.in_dim, d, (config.in_dim, d)), f"{name}.h{k}.w")
        a = ad.parameter(_uniform(rng, 2 * d, 1, (2 * d, 1)), f"{name}.h{k}.a")
        heads.append(GatHeadParams(w=w, a=a))
    return GatLayerParams(config=config, heads=heads)


def init_params(config: ModelConfig, seed: int) -> ResidualGatModel:
    """Glorot-uniform weights, zero bias; deterministic per seed."""
    rng = split_rng(seed, "init")
    configs = config.layer_configs()
    names = ["gat1", "gat2", "block1", "block2", "block3"]
    layers = [_init_layer(rng, cfg, name) for cfg, name in zip(configs, names)]
    d = config.hidden_width
    head_w = ad.parameter(_uniform(rng, d, N_CLASSES, (d, N_CLASSES)), "head.w")
    head_b = ad.parameter(np.zeros((1, N_CLASSES)), "head.b")
    return ResidualGatModel(
        config=config,
        gat1=layers[0],
        gat2=layers[1],
        block=layers[2:],
        head_w=head_w,
        head_b=head_b,
    )


def _project(tape: Tape | None, h, w: Tensor) -> Tensor:
    if isinstance(h, Tensor):
        return ad.matmul(tape, h, w)
    return ad.input_matmul(tape, h, w)


def _n_rows(h) -> int:
    return h.shape[0]


def attention_scores(
    head: GatHeadParams,
    h,
    graph: DocumentGraph | None = None,
    slope: float = 0.2,
    tape: Tape | None = None,
) -> Tensor:
    """Raw pairwise scores e_ij = leaky_relu(a . [W h_i || W h_j]).

    The full N x N matrix is returned; only entries inside a node's
    neighborhood are meaningful downstream (the softmax masks the rest).
    """
    if graph is not None and _n_rows(h) != graph.n_nodes:
        raise ValueError(f"feature rows {_n_rows(h)} != graph nodes {graph.n_nodes}")
    p = _project(tape, h, head.w)
    return _scores_from_projection(tape, head, p, slope)


def _scores_from_projection(tape: Tape | None, head: GatHeadParams, p: Tensor, slope: float) -> Tensor:
    d = head.w.shape[1]
    if head.a.shape != (2 * d, 1):
        raise ValueError(f"attention vector shape {head.a.shape} != ({2 * d}, 1)")
    a_src = ad.slice_rows(tape, head.a, 0, d)
    a_dst = ad.slice_rows(tape, head.a, d, 2 * d)
    # a . [W h_i || W h_j] splits into a source term plus a neighbor term.
    s = ad.matmul(tape, p, a_src)
    t = ad.matmul(tape, p, a_dst)
    return ad.leaky_relu(tape, ad.outer_add(tape, s, t), slope)


def _head_forward(
    tape: Tape | None, head: GatHeadParams, h, mask: np.ndarray, slope: float
) -> tuple[Tensor, Tensor]:
    p = _project(tape, h, head.w)
    alpha = ad.gat_attention(tape, p, head.a, mask, slope)
    return alpha, ad.matmul(tape, alpha, p)


def gat_layer_forward(
    tape: Tape | None,
    layer: GatLayerParams,
    h,
    mask: np.ndarray,
    probe: dict | None = None,
    probe_key: str = "layer",
) -> Tensor:
    """One multi-head attention layer; heads merged per the layer config,
    activation applied after the merge."""
    cfg = layer.config
    if _n_rows(h) != mask.shape[0]:
        raise ValueError(f"feature rows {_n_rows(h)} != mask rows {mask.shape[0]}")
    if h.shape[1] != cfg.in_dim:
        raise ValueError(f"input width {h.shape[1]} != layer in_dim {cfg.in_dim}")
    merged: Tensor | None = None
    for k, head in enumerate(layer.heads):
        alpha, out = _head_forward(tape, head, h, mask, cfg.leaky_slope)
        if probe is not None:
            probe.setdefault("attention", []).append((probe_key, k, alpha.values.copy()))
        if merged is None:
            merged = out
        elif cfg.merge == "concat":
            merged = ad.concat_cols(tape, merged, out)
        else:
            merged = ad.add(tape, merged, out)
    assert merged is not None
    if cfg.merge == "average" and cfg.heads > 1:
        merged = ad.scale(tape, merged, 1.0 / cfg.heads)
    if cfg.activation == "elu":
        merged = ad.elu(tape, merged)
    return merged


def residual_block_forward(
    tape: Tape | None,
    block: list[GatLayerParams],
    h: Tensor,
    mask: np.ndarray,
    probe: dict | None = None,
) -> Tensor:
    """Three attention layers with the block input added back before the
    third (plain elementwise sum; widths are enforced at construction)."""
    if len(block) != 3:
        raise ValueError(f"residual block needs 3 layers, got {len(block)}")
    h1 = gat_layer_forward(tape, block[0], h, mask, probe, "block1")
    h2 = gat_layer_forward(tape, block[1], h1, mask, probe, "block2")
    h3 = ad.add(tape, h, h2)
    if probe is not None:
        probe["block_input"] = h.values.copy()
        probe["block_pre3"] = h3.values.copy()
    return gat_layer_forward(tape, block[2], h3, mask, probe, "block3")


def forward_logits(
    model: ResidualGatModel,
    features,
    mask: np.ndarray,
    tape: Tape | None = None,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
    probe: dict | None = None,
) -> Tensor:
    """Full pipeline up to the class logits (1 x 4)."""
    h = gat_layer_forward(tape, model.gat1, features, mask, probe, "gat1")
    h = gat_layer_forward(tape, model.gat2, h, mask, probe, "gat2")
    h = residual_block_forward(tape, model.block, h, mask, probe)
    pooled = ad.row_mean(tape, h)
    pooled = ad.dropout(tape, pooled, model.config.dropout_keep, train_mode, rng)
    return ad.add(tape, ad.matmul(tape, pooled, model.head_w), model.head_b)


def forward_probabilities(
    model: ResidualGatModel,
    graph: DocumentGraph,
    train_mode: bool = False,
    seed: int = 0,
    probe: dict | None = None,
) -> np.ndarray:
    """Class probabilities for one graph; sums to 1 within 1e-12."""
    rng = split_rng(seed, "dropout") if train_mode else None
    logits = forward_logits(
        model,
        graph.node_features,
        graph.adjacency_mask(),
        tape=None,
        train_mode=train_mode,
        rng=rng,
        probe=probe,
    )
    return softmax_row(logits.values[0])


def softmax_row(row: np.ndarray) -> np.ndarray:
    shifted = row - row.max()
    exps = np.exp(shifted)
    return exps / exps.sum()
