"""IIIF Image API URL construction and Presentation manifest ingestion.

The platform never proxies pixels: it emits Image API 3.0 URLs of the
shape {base}/{region}/{size}/0/default.jpg and leaves retrieval to the
browser and the image server.  Presentation manifests (v2 "sequences/
canvases" and v3 "items") are walked into page elements, one per canvas.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping

import requests

from .elements import ElementRecord, ElementService, ImageRef, bounding_box
from .errors import ManifestError, RegionError

FETCH_TIMEOUT_SECONDS = 30
FETCH_MAX_REDIRECTS = 3


@dataclass(frozen=True)
class IiifRegion:
    """Pixel region of an image; (x, y, w, h) or the distinguished FULL."""

    x: int = 0
    y: int = 0
    w: int = 0
    h: int = 0
    full: bool = False

    @classmethod
    def full_frame(cls) -> "IiifRegion":
        return cls(full=True)

    def spec(self) -> str:
        return "full" if self.full else f"{self.x},{self.y},{self.w},{self.h}"

    @classmethod
    def parse(cls, text: str) -> "IiifRegion":
        if text == "full":
            return cls.full_frame()
        parts = text.split(",")
        if len(parts) != 4:
            raise RegionError(f"malformed region {text!r}")
        x, y, w, h = (int(p) for p in parts)
        return cls(x=x, y=y, w=w, h=h)


FULL = IiifRegion.full_frame()


def image_url(image: ImageRef, region: IiifRegion = FULL,
              max_width: int | None = None) -> str:
    """Image API 3.0 URL for a region of an image, bit-exact.

    Size is "max" or "{max_width}," (width-constrained, aspect preserved).
    """
    if not region.full:
        if region.w < 1 or region.h < 1:
            raise RegionError(f"region {region.spec()} has empty extent")
        if (region.x < 0 or region.y < 0
                or region.x + region.w > image.width
                or region.y + region.h > image.height):
            raise RegionError(
                f"region {region.spec()} outside image {image.width}x{image.height}"
            )
    if max_width is not None and max_width < 1:
        raise RegionError("max_width must be >= 1")
    size = "max" if max_width is None else f"{max_width},"
    base = image.iiif_base_uri.rstrip("/")
    return f"{base}/{region.spec()}/{size}/0/default.jpg"


def context_crop(element: ElementRecord, margin: float | Fraction | None = None) -> IiifRegion:
    """Bounding box of the element's polygon expanded by a relative margin.

    The box grows by margin*w on each side horizontally and margin*h
    vertically, is clamped to the image, and is rounded outward to integer
    pixels so it always contains the original box.
    """
    if margin is None:
        margin = 0.15
    margin = float(margin)
    if margin < 0:
        raise RegionError("margin must be >= 0")
    x, y, w, h = bounding_box(element.polygon)
    left = x - margin * w
    top = y - margin * h
    right = x + w + margin * w
    bottom = y + h + margin * h
    left = max(0.0, left)
    top = max(0.0, top)
    right = min(float(element.image.width), right)
    bottom = min(float(element.image.height), bottom)
    ix = math.floor(left)
    iy = math.floor(top)
    iw = min(element.image.width, max(1, math.ceil(right) - ix))
    ih = min(element.image.height, max(1, math.ceil(bottom) - iy))
    # the w,h >= 1 floor can push a boundary-hugging box past the edge;
    # shift back inside rather than emit an out-of-image region
    ix = max(0, min(ix, element.image.width - iw))
    iy = max(0, min(iy, element.image.height - ih))
    return IiifRegion(x=ix, y=iy, w=iw, h=ih)


def element_crop_url(element: ElementRecord, margin: float = 0.0,
                     max_width: int | None = None) -> str:
    region = context_crop(element, margin)
    return image_url(element.image, region, max_width)


# ---------------------------------------------------------------------------
# Presentation manifest ingestion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ManifestPage:
    image_uri: str
    width: int
    height: int
    label: str
    sequence_index: int


def parse_manifest(document: Mapping[str, Any] | str | bytes) -> list[ManifestPage]:
    """Extract ordered pages from a Presentation manifest, v2 or v3."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(document, Mapping):
        raise ManifestError("manifest root must be a JSON object")

    if "items" in document:
        canvases = document.get("items") or []
        extractor = _page_from_v3_canvas
    elif "sequences" in document:
        sequences = document.get("sequences") or []
        canvases = []
        for seq in sequences:
            canvases.extend(seq.get("canvases") or [])
        extractor = _page_from_v2_canvas
    else:
        raise ManifestError("manifest carries neither 'items' (v3) nor 'sequences' (v2)")

    if not canvases:
        raise ManifestError("manifest contains no canvases")
    return [extractor(canvas, i) for i, canvas in enumerate(canvases)]


def _canvas_dims(canvas: Mapping[str, Any], index: int) -> tuple[int, int]:
    width, height = canvas.get("width"), canvas.get("height")
    if not width or not height:
        raise ManifestError(f"canvas {index} is missing pixel dimensions")
    return int(width), int(height)


def _service_id(service: Any) -> str | None:
    # first image service wins; value may be a dict, a list, or a URL string
    if isinstance(service, list):
        service = service[0] if service else None
    if isinstance(service, Mapping):
        return str(service.get("id") or service.get("@id") or "") or None
    if isinstance(service, str):
        return service or None
    return None


def _page_from_v3_canvas(canvas: Mapping[str, Any], index: int) -> ManifestPage:
    width, height = _canvas_dims(canvas, index)
    try:
        body = canvas["items"][0]["items"][0]["body"]
    except (KeyError, IndexError, TypeError):
        raise ManifestError(f"canvas {index} has no painting annotation") from None
    uri = _service_id(body.get("service"))
    if uri is None:
        raise ManifestError(f"canvas {index} has no image service")
    return ManifestPage(
        image_uri=uri.rstrip("/"),
        width=width,
        height=height,
        label=_label_text(canvas.get("label")),
        sequence_index=index,
    )


def _page_from_v2_canvas(canvas: Mapping[str, Any], index: int) -> ManifestPage:
    width, height = _canvas_dims(canvas, index)
    images = canvas.get("images") or []
    resource = images[0].get("resource", {}) if images else {}
    uri = _service_id(resource.get("service"))
    if uri is None:
        raise ManifestError(f"canvas {index} has no image service")
    return ManifestPage(
        image_uri=uri.rstrip("/"),
        width=width,
        height=height,
        label=_label_text(canvas.get("label")),
        sequence_index=index,
    )


def _label_text(label: Any) -> str:
    if isinstance(label, str):
        return label
    if isinstance(label, Mapping):  # v3 language map {"fr": ["p. 1"]}
        for values in label.values():
            if isinstance(values, list) and values:
                return str(values[0])
            if isinstance(values, str):
                return values
    return ""


def ingest_manifest(
    elements: ElementService,
    document: Mapping[str, Any] | str | bytes,
    project_id: str,
    page_type: str = "page",
) -> list[ElementRecord]:
    """One page element per canvas: full-frame polygon, manifest order."""
    pages = parse_manifest(document)
    created = []
    for page in pages:
        image = ImageRef(page.image_uri, page.width, page.height)
        polygon = [(0, 0), (page.width, 0), (page.width, page.height), (0, page.height)]
        created.append(elements.create_element(
            project_id=project_id,
            element_type=page_type,
            image=image,
            polygon=polygon,
            order_index=page.sequence_index,
            name=page.label,
        ))
    return created


def fetch_manifest(url: str) -> dict[str, Any]:
    """Retrieve a manifest over HTTPS: 30 s timeout, at most 3 redirects."""
    session = requests.Session()
    session.max_redirects = FETCH_MAX_REDIRECTS
    try:
        response = session.get(url, timeout=FETCH_TIMEOUT_SECONDS)
        response.raise_for_status()
        return response.json()
    except requests.RequestException as exc:
        raise ManifestError(f"could not fetch manifest from {url}: {exc}") from exc
    finally:
        session.close()
