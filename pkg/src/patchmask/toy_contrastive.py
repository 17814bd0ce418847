"""Desk-scale symmetric InfoNCE trainer wired through masking and batching.

The encoders are single linear maps followed by L2 normalization: the
image side consumes the mean of an image's visible raw patch vectors, the
text side a bag-of-tokens count vector. That is deliberately tiny; the
point is to verify the mask -> batch-shape -> loss -> gradient path, not
representation quality. Gradients are analytic and full-batch, no
momentum, so every step is deterministic given (inputs, seed, step).
"""

from dataclasses import dataclass

import numpy as np

from .batch_shaping import shape_batch
from .cluster_masker import mask_image, mask_ratio
from .errors import ConfigError, DataError
from .patch_grid import patchify

_NORM_GUARD = 1e-12

# sub-seed namespaces: (seed, namespace, ...) feeds np.random.default_rng
_NS_MASK = 0  # (seed, 0, step, image_index)
_NS_SHAPE = 1  # (seed, 1, step)
_NS_ENCODER = 2  # (seed, 2)


@dataclass
class TrainState:
    """Progress counters plus the schedule/temperature constants."""

    epoch_total: int
    epoch_current: int = 0
    alpha_exponent: float = 1.0
    temperature: float = 0.07
    step: int = 0

    def __post_init__(self):
        if self.epoch_total <= 0:
            raise ConfigError(f"epoch_total must be positive, got {self.epoch_total}")
        if not 0 <= self.epoch_current <= self.epoch_total:
            raise ConfigError(
                f"epoch_current must lie in [0, {self.epoch_total}], got {self.epoch_current}"
            )
        if self.alpha_exponent <= 0.0:
            raise ConfigError(f"alpha_exponent must be positive, got {self.alpha_exponent}")
        if self.temperature <= 0.0:
            raise ConfigError(f"temperature must be positive, got {self.temperature}")


def alpha_schedule(state):
    """Blend coefficient (E_c / E_t) ** k; 0 at the start, 1 at the end."""
    return float(state.epoch_current / state.epoch_total) ** state.alpha_exponent


@dataclass
class ToyEncoders:
    """Linear projections to the shared embedding space (rows = output dims)."""

    w_image: np.ndarray  # (dim, patch_dim)
    w_text: np.ndarray  # (dim, vocab_size)


def init_encoders(patch_dim, vocab_size, dim, seed):
    rng = np.random.default_rng((seed, _NS_ENCODER))
    return ToyEncoders(
        w_image=rng.standard_normal((dim, patch_dim)) / np.sqrt(patch_dim),
        w_text=rng.standard_normal((dim, vocab_size)) / np.sqrt(vocab_size),
    )


def _normalize_rows(z):
    norms = np.sqrt((z * z).sum(axis=1, keepdims=True))
    return z / np.maximum(norms, _NORM_GUARD), norms


def encode_images(encoders, pooled):
    """Unit-norm image embeddings from pooled visible-patch vectors."""
    unit, _ = _normalize_rows(pooled @ encoders.w_image.T)
    return unit


def encode_texts(encoders, bags):
    """Unit-norm text embeddings from bag-of-token count vectors."""
    unit, _ = _normalize_rows(bags @ encoders.w_text.T)
    return unit


def _check_embeddings(image_embeds, text_embeds):
    if image_embeds.ndim != 2 or image_embeds.shape != text_embeds.shape:
        raise DataError(
            f"embedding batches must be matching (N, D) arrays, got "
            f"{image_embeds.shape} and {text_embeds.shape}"
        )
    if image_embeds.shape[0] < 2:
        raise DataError("InfoNCE needs at least 2 pairs")
    if not (np.isfinite(image_embeds).all() and np.isfinite(text_embeds).all()):
        raise DataError("embeddings contain non-finite values")
    for emb in (image_embeds, text_embeds):
        norms = np.sqrt((emb * emb).sum(axis=1))
        if np.abs(norms - 1.0).max() > 1e-6:
            raise DataError("embeddings must be L2-normalized within 1e-6")


def _row_losses(logits):
    # stable -log softmax diagonal: lse(row) - diagonal
    shift = logits.max(axis=1, keepdims=True)
    lse = shift[:, 0] + np.log(np.exp(logits - shift).sum(axis=1))
    return lse - np.diagonal(logits)


def info_nce_v2l(image_embeds, text_embeds, tau):
    """Vision-to-language InfoNCE: each image against all texts in batch.

    Mean over i of -log( exp(I_i . T_i / tau) / sum_j exp(I_i . T_j / tau) ),
    computed with max-subtracted log-sum-exp.
    """
    image_embeds = np.asarray(image_embeds, dtype=np.float64)
    text_embeds = np.asarray(text_embeds, dtype=np.float64)
    _check_embeddings(image_embeds, text_embeds)
    if tau <= 0.0:
        raise ConfigError(f"temperature must be positive, got {tau}")
    logits = (image_embeds @ text_embeds.T) / tau
    return float(_row_losses(logits).mean())


def info_nce_symmetric(image_embeds, text_embeds, tau):
    """Mean of the vision-to-language and language-to-vision losses."""
    return 0.5 * (
        info_nce_v2l(image_embeds, text_embeds, tau)
        + info_nce_v2l(text_embeds, image_embeds, tau)
    )


def loss_and_grads(pooled, bags, encoders, tau):
    """Symmetric InfoNCE and its analytic gradients w.r.t. both projections.

    Returns (loss, d_w_image, d_w_text). The chain runs through the row
    normalization u = z / |z| via du = (g - (g.u) u) / |z|.
    """
    if pooled.shape[0] != bags.shape[0]:
        raise DataError(
            f"batch size mismatch: {pooled.shape[0]} images vs {bags.shape[0]} texts"
        )
    n = pooled.shape[0]
    if n < 2:
        raise DataError("InfoNCE needs at least 2 pairs")
    if not (np.isfinite(pooled).all() and np.isfinite(bags).all()):
        raise DataError("training inputs contain non-finite values")

    u, nu = _normalize_rows(pooled @ encoders.w_image.T)
    v, nv = _normalize_rows(bags @ encoders.w_text.T)
    logits = (u @ v.T) / tau

    loss = 0.5 * float(_row_losses(logits).mean() + _row_losses(logits.T).mean())

    row_soft = np.exp(logits - logits.max(axis=1, keepdims=True))
    row_soft /= row_soft.sum(axis=1, keepdims=True)
    col_soft = np.exp(logits - logits.max(axis=0, keepdims=True))
    col_soft /= col_soft.sum(axis=0, keepdims=True)
    eye = np.eye(n)
    d_logits = 0.5 * ((row_soft - eye) + (col_soft - eye)) / n

    d_u = (d_logits @ v) / tau
    d_v = (d_logits.T @ u) / tau
    d_zi = (d_u - (d_u * u).sum(axis=1, keepdims=True) * u) / np.maximum(nu, _NORM_GUARD)
    d_zt = (d_v - (d_v * v).sum(axis=1, keepdims=True) * v) / np.maximum(nv, _NORM_GUARD)
    return loss, d_zi.T @ pooled, d_zt.T @ bags


def pool_visible_patches(grids, shaped):
    """Mean raw patch vector over each image's attention-flagged slots.

    Padding slots and masked patches never contribute; an image with no
    real slots pools to the zero vector.
    """
    pooled = np.zeros((len(grids), grids[0].patch_dim))
    for i, grid in enumerate(grids):
        real = shaped.kept_indices[i][shaped.attention[i]]
        if real.size:
            pooled[i] = grid.patches[real].mean(axis=0)
    return pooled


@dataclass
class StepInputs:
    """Everything train_step derives from the images before the loss."""

    grids: list
    masks: list
    shaped: object
    pooled: np.ndarray
    alpha: float
    mean_mask_ratio: float


def prepare_step_inputs(images, config, state, patch_size, beta):
    """Masks, shaped batch, and pooled features for one training step.

    Masks are regenerated per step with sub-seeds derived from
    (config.seed, step, image index), so repeating a step is bit-exact
    while successive steps see fresh masks.
    """
    alpha = alpha_schedule(state)
    grids, masks = [], []
    for i, image in enumerate(images):
        rng = np.random.default_rng((config.seed, _NS_MASK, state.step, i))
        masks.append(mask_image(image, patch_size, config, rng, alpha))
        grids.append(patchify(image, patch_size))
    shaped = shape_batch(masks, beta, np.random.default_rng((config.seed, _NS_SHAPE, state.step)))
    return StepInputs(
        grids=grids,
        masks=masks,
        shaped=shaped,
        pooled=pool_visible_patches(grids, shaped),
        alpha=alpha,
        mean_mask_ratio=float(np.mean([mask_ratio(m) for m in masks])),
    )


@dataclass
class StepResult:
    loss: float
    alpha: float
    mean_mask_ratio: float


def train_step(encoders, images, bags, config, state, patch_size, beta, learning_rate):
    """One full-batch gradient-descent step on the symmetric loss.

    Returns (updated encoders, StepResult). The caller owns the state and
    advances state.step / state.epoch_current between calls.
    """
    inputs = prepare_step_inputs(images, config, state, patch_size, beta)
    loss, d_wi, d_wt = loss_and_grads(inputs.pooled, bags, encoders, state.temperature)
    updated = ToyEncoders(
        w_image=encoders.w_image - learning_rate * d_wi,
        w_text=encoders.w_text - learning_rate * d_wt,
    )
    return updated, StepResult(loss=loss, alpha=inputs.alpha, mean_mask_ratio=inputs.mean_mask_ratio)


def train_loop(
    images,
    bags,
    config,
    epochs,
    patch_size,
    beta,
    learning_rate,
    embed_dim=16,
    steps_per_epoch=1,
    alpha_exponent=1.0,
    temperature=0.07,
):
    """Run epochs x steps_per_epoch full-batch steps over a fixed dataset.

    The blend coefficient advances once per epoch. Returns the final
    encoders and one StepResult-shaped log row (step, loss, alpha,
    mean_mask_ratio) per step.
    """
    bags = np.asarray(bags, dtype=np.float64)
    patch_dim = patchify(images[0], patch_size).patch_dim
    encoders = init_encoders(patch_dim, bags.shape[1], embed_dim, config.seed)
    state = TrainState(
        epoch_total=epochs,
        alpha_exponent=alpha_exponent,
        temperature=temperature,
    )
    rows = []
    for epoch in range(epochs):
        state.epoch_current = epoch
        for _ in range(steps_per_epoch):
            encoders, result = train_step(
                encoders, images, bags, config, state, patch_size, beta, learning_rate
            )
            rows.append((state.step, result.loss, result.alpha, result.mean_mask_ratio))
            state.step += 1
    return encoders, rows
