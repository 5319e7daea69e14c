"""
Synthetic grayscale phantoms with an exactly known segmentation.

A phantom is a flat background with disks and rectangles drawn at a single
object intensity, optionally surrounded by a halo ring of a third intensity,
plus Gaussian or salt-and-pepper noise. The reference mask covers the objects
and their halo and is never touched by the noise.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from monty.io import zopen
from scipy.ndimage import binary_dilation

from fuzzyseg.core import BinaryMask, GrayImage, InvalidParametersError

__author__ = "fuzzyseg developers"

NOISE_KINDS = ("none", "gaussian", "saltpepper")


@dataclass(frozen=True)
class Disk(object):
    """Disk of pixels (x, y) with (x - cx)^2 + (y - cy)^2 <= r^2"""
    center_x: float
    center_y: float
    radius: float

    def fits(self, width, height):
        return self.radius >= 0 and \
            self.center_x - self.radius >= 0 and \
            self.center_y - self.radius >= 0 and \
            self.center_x + self.radius <= width - 1 and \
            self.center_y + self.radius <= height - 1

    def rasterize(self, width, height):
        y, x = np.ogrid[:height, :width]
        return (x - self.center_x) ** 2 + (y - self.center_y) ** 2 <= \
            self.radius ** 2


@dataclass(frozen=True)
class Rectangle(object):
    """Axis-aligned block of w columns and h rows with corner (x, y)"""
    x: int
    y: int
    w: int
    h: int

    def fits(self, width, height):
        return self.x >= 0 and self.y >= 0 and self.w >= 1 and \
            self.h >= 1 and self.x + self.w <= width and \
            self.y + self.h <= height

    def rasterize(self, width, height):
        bits = np.zeros((height, width), dtype=bool)
        bits[self.y:self.y + self.h, self.x:self.x + self.w] = True
        return bits


_PRESETS = {
    # straight vertical edge through the middle
    "two_region": dict(width=128, height=128, background_intensity=0.2,
                       object_intensity=0.8,
                       objects=(Rectangle(64, 0, 64, 128),)),
    "two_disk": dict(width=128, height=128, background_intensity=0.2,
                     object_intensity=0.8,
                     objects=(Disk(40, 64, 20), Disk(88, 64, 20)),
                     noise="gaussian", sigma=0.15),
    "halo": dict(width=64, height=64, background_intensity=0.1,
                 object_intensity=0.9, objects=(Disk(32, 32, 12),),
                 halo_width=4, halo_intensity=0.5),
}


@dataclass(frozen=True)
class PhantomSpec(object):
    """
    Description of a synthetic phantom.

    Args:
        width (int): image width in pixels.
        height (int): image height in pixels.
        background_intensity (float): background level in [0, 1].
        object_intensity (float): object level in [0, 1], distinct from the
            background.
        objects (tuple): Disk and Rectangle shapes, all inside the image.
        noise (str): "none", "gaussian" or "saltpepper".
        sigma (float): Gaussian standard deviation, >= 0.
        prob (float): salt-and-pepper probability per pixel, in [0, 1].
        seed (int): noise seed.
        halo_width (int): width of a ring drawn around the objects, 0 for no
            ring. Ring pixels belong to the reference object.
        halo_intensity (float): ring level, distinct from the other two.
    """
    width: int = 128
    height: int = 128
    background_intensity: float = 0.2
    object_intensity: float = 0.8
    objects: tuple = field(default_factory=tuple)
    noise: str = "none"
    sigma: float = 0.
    prob: float = 0.
    seed: int = 1
    halo_width: int = 0
    halo_intensity: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if self.width < 1 or self.height < 1:
            raise InvalidParametersError(
                "Phantom size must be positive, got {}x{}".format(
                    self.width, self.height))
        levels = [self.background_intensity, self.object_intensity]
        if self.halo_width > 0:
            levels.append(self.halo_intensity)
        elif self.halo_width < 0:
            raise InvalidParametersError("halo_width must be >= 0")
        for level in levels:
            if not 0 <= level <= 1:
                raise InvalidParametersError(
                    "Intensity {} outside [0, 1]".format(level))
        if len(set(levels)) != len(levels):
            raise InvalidParametersError(
                "Phantom intensities must be distinct, got {}".format(levels))
        for shape in self.objects:
            if not isinstance(shape, (Disk, Rectangle)):
                raise InvalidParametersError(
                    "Unknown phantom shape {!r}".format(shape))
            if not shape.fits(self.width, self.height):
                raise InvalidParametersError(
                    "{} does not fit in a {}x{} image".format(
                        shape, self.width, self.height))
        if self.noise not in NOISE_KINDS:
            raise InvalidParametersError(
                "Unknown noise {}, choose from {}".format(self.noise,
                                                          NOISE_KINDS))
        if not self.sigma >= 0:
            raise InvalidParametersError("sigma must be >= 0")
        if not 0 <= self.prob <= 1:
            raise InvalidParametersError("prob must lie in [0, 1]")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InvalidParametersError(
                "seed must be a non-negative integer, got {}".format(
                    self.seed))

    def with_seed(self, seed):
        return replace(self, seed=seed)

    @staticmethod
    def from_preset(preset_name, **overrides):
        """
        Named phantom.

        Args:
            preset_name (str): "two_region" (noiseless half-plane object),
                "two_disk" (two disks, Gaussian noise with sigma 0.15) or
                "halo" (one disk with a ring, for three-cluster runs).
            **overrides: fields replacing the preset values.

        Returns:
            (PhantomSpec)
        """
        if preset_name not in _PRESETS:
            raise InvalidParametersError(
                "Unknown phantom preset {}, choose from {}".format(
                    preset_name, sorted(_PRESETS)))
        kwargs = dict(_PRESETS[preset_name])
        kwargs.update(overrides)
        return PhantomSpec(**kwargs)

    @staticmethod
    def from_text(text):
        """
        Parse key = value lines (see from_file for the keys).
        """
        kwargs = {}
        objects = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidParametersError(
                    "Line {}: expected key = value, got {!r}".format(lineno,
                                                                     raw))
            key, value = (s.strip() for s in line.split("=", 1))
            try:
                if key in _SHAPE_KEYS:
                    numbers = [float(v) for v in value.split(",")]
                    objects.append(_SHAPE_KEYS[key](numbers))
                elif key in _SCALAR_KEYS:
                    name, cast = _SCALAR_KEYS[key]
                    kwargs[name] = cast(value)
                else:
                    raise InvalidParametersError(
                        "Line {}: unknown key {!r}".format(lineno, key))
            except (TypeError, ValueError) as e:
                if isinstance(e, InvalidParametersError):
                    raise
                raise InvalidParametersError(
                    "Line {}: bad value for {}: {}".format(lineno, key, e))
        kwargs["objects"] = tuple(objects)
        return PhantomSpec(**kwargs)

    @staticmethod
    def from_file(filename):
        """
        Read a phantom description, one key = value per line.

        Keys: width, height, background, object, disk = cx,cy,r and
        rect = x,y,w,h (both repeatable), noise = none|gaussian|saltpepper,
        sigma, prob, seed, halo_width, halo. Blank lines and text after # are
        ignored.

        Args:
            filename (str): path, may be gzip or bz2 compressed.

        Returns:
            (PhantomSpec)
        """
        with zopen(filename, "rt") as f:
            return PhantomSpec.from_text(f.read())


def _disk(numbers):
    if len(numbers) != 3:
        raise ValueError("disk needs cx,cy,r")
    return Disk(*numbers)


def _rect(numbers):
    if len(numbers) != 4 or any(n != int(n) for n in numbers):
        raise ValueError("rect needs integers x,y,w,h")
    return Rectangle(*(int(n) for n in numbers))


def _noise(value):
    value = value.lower()
    if value not in NOISE_KINDS:
        raise ValueError("noise must be one of {}".format(NOISE_KINDS))
    return value


_SHAPE_KEYS = {"disk": _disk, "rect": _rect}

_SCALAR_KEYS = {
    "width": ("width", int),
    "height": ("height", int),
    "background": ("background_intensity", float),
    "object": ("object_intensity", float),
    "noise": ("noise", _noise),
    "sigma": ("sigma", float),
    "prob": ("prob", float),
    "seed": ("seed", int),
    "halo_width": ("halo_width", int),
    "halo": ("halo_intensity", float),
}


def object_mask(spec):
    """Union of the rasterized shapes, without the halo"""
    bits = np.zeros((spec.height, spec.width), dtype=bool)
    for shape in spec.objects:
        bits |= shape.rasterize(spec.width, spec.height)
    return bits


def _halo_ring(spec, core):
    r = spec.halo_width
    y, x = np.ogrid[-r:r + 1, -r:r + 1]
    footprint = x ** 2 + y ** 2 <= r ** 2
    return binary_dilation(core, structure=footprint) & ~core


def generate(spec):
    """
    Render a phantom and its reference mask.

    Args:
        spec (PhantomSpec): phantom description.

    Returns:
        (GrayImage, BinaryMask) the (noisy) image and the object mask.
    """
    core = object_mask(spec)
    clean = np.full((spec.height, spec.width), spec.background_intensity)
    clean[core] = spec.object_intensity
    truth = core
    if spec.halo_width > 0:
        ring = _halo_ring(spec, core)
        clean[ring] = spec.halo_intensity
        truth = core | ring

    rng = np.random.default_rng(spec.seed)
    if spec.noise == "gaussian":
        noisy = np.clip(clean + rng.normal(0., spec.sigma, clean.shape),
                        0., 1.)
    elif spec.noise == "saltpepper":
        hit = rng.random(clean.shape) < spec.prob
        salt = rng.random(clean.shape) < 0.5
        noisy = np.where(hit, salt.astype(float), clean)
    else:
        noisy = clean
    return GrayImage(noisy), BinaryMask(truth)
