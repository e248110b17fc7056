from __future__ import annotations

import json

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from scriptorium.elements import ElementRecord, ImageRef, bounding_box
from scriptorium.errors import ManifestError, RegionError
from scriptorium.iiif import (
    FULL,
    IiifRegion,
    context_crop,
    image_url,
    ingest_manifest,
    parse_manifest,
)

# (base, width, height, region, max_width) -> expected Image API 3.0 URL,
# written out by hand from the URI template {base}/{region}/{size}/0/default.jpg
GOLDEN_URLS = [
    ("https://iiif.ex/ab", 2000, 1500, None, None,
     "https://iiif.ex/ab/full/max/0/default.jpg"),
    ("https://iiif.ex/ab", 2000, 1500, (100, 200, 300, 400), None,
     "https://iiif.ex/ab/100,200,300,400/max/0/default.jpg"),
    ("https://iiif.ex/ab", 2000, 1500, None, 800,
     "https://iiif.ex/ab/full/800,/0/default.jpg"),
    ("https://iiif.ex/ab", 2000, 1500, (0, 0, 2000, 1500), None,
     "https://iiif.ex/ab/0,0,2000,1500/max/0/default.jpg"),
    ("https://iiif.ex/ab", 2000, 1500, (0, 0, 1, 1), None,
     "https://iiif.ex/ab/0,0,1,1/max/0/default.jpg"),
    ("https://iiif.ex/ab", 2000, 1500, (1999, 1499, 1, 1), None,
     "https://iiif.ex/ab/1999,1499,1,1/max/0/default.jpg"),
    ("https://iiif.ex/ab", 2000, 1500, (100, 200, 300, 400), 150,
     "https://iiif.ex/ab/100,200,300,400/150,/0/default.jpg"),
    ("https://iiif.ex/ab/", 2000, 1500, None, None,
     "https://iiif.ex/ab/full/max/0/default.jpg"),
    ("https://images.example.org/iiif/3/reg%2Fp1", 1000, 800, (10, 20, 30, 40), None,
     "https://images.example.org/iiif/3/reg%2Fp1/10,20,30,40/max/0/default.jpg"),
    ("https://images.example.org/iiif/3/reg%2Fp1", 1000, 800, None, 2,
     "https://images.example.org/iiif/3/reg%2Fp1/full/2,/0/default.jpg"),
    ("http://localhost:8182/iiif/2/page-0001", 640, 480, (0, 0, 640, 1), None,
     "http://localhost:8182/iiif/2/page-0001/0,0,640,1/max/0/default.jpg"),
    ("http://localhost:8182/iiif/2/page-0001", 640, 480, (0, 0, 1, 480), None,
     "http://localhost:8182/iiif/2/page-0001/0,0,1,480/max/0/default.jpg"),
    ("http://localhost:8182/iiif/2/page-0001", 640, 480, None, 640,
     "http://localhost:8182/iiif/2/page-0001/full/640,/0/default.jpg"),
    ("https://iiif.archive.org/iiif/council-1790", 4096, 6144, (2048, 3072, 2048, 3072),
     None,
     "https://iiif.archive.org/iiif/council-1790/2048,3072,2048,3072/max/0/default.jpg"),
    ("https://iiif.archive.org/iiif/council-1790", 4096, 6144, (1, 2, 3, 4), 1,
     "https://iiif.archive.org/iiif/council-1790/1,2,3,4/1,/0/default.jpg"),
    ("https://iiif.ex/v/x-y_z.tif", 123, 456, None, None,
     "https://iiif.ex/v/x-y_z.tif/full/max/0/default.jpg"),
    ("https://iiif.ex/v/x-y_z.tif", 123, 456, (0, 0, 123, 456), 123,
     "https://iiif.ex/v/x-y_z.tif/0,0,123,456/123,/0/default.jpg"),
    ("https://iiif.ex/v/x-y_z.tif", 123, 456, (60, 220, 63, 236), None,
     "https://iiif.ex/v/x-y_z.tif/60,220,63,236/max/0/default.jpg"),
    ("https://gallica.example.fr/iiif/ark:%2F12148%2Fb1", 5000, 7000, None, 1024,
     "https://gallica.example.fr/iiif/ark:%2F12148%2Fb1/full/1024,/0/default.jpg"),
    ("https://gallica.example.fr/iiif/ark:%2F12148%2Fb1", 5000, 7000,
     (4999, 0, 1, 7000), None,
     "https://gallica.example.fr/iiif/ark:%2F12148%2Fb1/4999,0,1,7000/max/0/default.jpg"),
]


def element_for(polygon, width=1000, height=800) -> ElementRecord:
    return ElementRecord(
        element_id="el_x", project_id="prj_x", element_type="zone",
        image=ImageRef("https://iiif.ex/img", width, height),
        polygon=[(float(x), float(y)) for x, y in polygon],
    )


def collinear(points) -> bool:
    (x0, y0), rest = points[0], points[1:]
    base = next(((x - x0, y - y0) for x, y in rest if (x, y) != (x0, y0)), None)
    if base is None:
        return True
    bx, by = base
    return all(bx * (y - y0) == by * (x - x0) for x, y in rest)


class TestImageUrl:
    @pytest.mark.parametrize("base,width,height,region,max_width,expected", GOLDEN_URLS)
    def test_golden_urls(self, base, width, height, region, max_width, expected):
        image = ImageRef(base, width, height)
        iiif_region = FULL if region is None else IiifRegion(*region)
        assert image_url(image, iiif_region, max_width) == expected

    def test_region_outside_image_rejected(self):
        image = ImageRef("https://iiif.ex/a", 100, 100)
        with pytest.raises(RegionError):
            image_url(image, IiifRegion(50, 50, 60, 10))

    def test_empty_region_rejected(self):
        image = ImageRef("https://iiif.ex/a", 100, 100)
        with pytest.raises(RegionError):
            image_url(image, IiifRegion(0, 0, 0, 10))

    def test_round_trip_region_substring(self):
        image = ImageRef("https://iiif.ex/a", 1000, 800)
        for region in (FULL, IiifRegion(1, 2, 3, 4), IiifRegion(0, 0, 1000, 800)):
            url = image_url(image, region)
            substring = url.removeprefix("https://iiif.ex/a/").split("/")[0]
            assert IiifRegion.parse(substring) == region

    @given(
        x=st.integers(0, 999), y=st.integers(0, 799),
        w=st.integers(1, 1000), h=st.integers(1, 800),
    )
    @settings(max_examples=200, deadline=None)
    def test_round_trip_property(self, x, y, w, h):
        image = ImageRef("https://iiif.ex/a", 1000, 800)
        w = min(w, 1000 - x)
        h = min(h, 800 - y)
        region = IiifRegion(x, y, w, h)
        url = image_url(image, region)
        assert IiifRegion.parse(url.split("/")[-4]) == region


class TestContextCrop:
    def test_margin_tenth(self):
        # bbox (100,100,100,50): 10 px sideways, 5 px vertically
        element = element_for([(100, 100), (200, 100), (200, 150), (100, 150)])
        assert context_crop(element, 0.1) == IiifRegion(90, 95, 120, 60)

    def test_zero_margin_is_identity(self):
        element = element_for([(100, 100), (200, 100), (200, 150), (100, 150)])
        assert context_crop(element, 0) == IiifRegion(100, 100, 100, 50)

    def test_clamped_at_origin(self):
        element = element_for([(0, 0), (50, 0), (50, 50), (0, 50)])
        assert context_crop(element, 0.5) == IiifRegion(0, 0, 75, 75)

    def test_clamped_at_far_edge(self):
        element = element_for([(950, 750), (1000, 750), (1000, 800), (950, 800)])
        region = context_crop(element, 0.5)
        assert region == IiifRegion(925, 725, 75, 75)

    def test_negative_margin_rejected(self):
        element = element_for([(0, 0), (50, 0), (50, 50), (0, 50)])
        with pytest.raises(RegionError):
            context_crop(element, -0.1)

    @given(
        points=st.lists(
            st.tuples(st.integers(0, 1000), st.integers(0, 800)),
            min_size=3, max_size=8),
        margin=st.floats(min_value=0, max_value=3, allow_nan=False),
    )
    @settings(max_examples=500, deadline=None)
    def test_containment_and_bounds(self, points, margin):
        assume(not collinear(points))  # degenerate rings are rejected upstream
        element = element_for(points)
        region = context_crop(element, margin)
        bx, by, bw, bh = bounding_box(points)
        assert region.x <= bx and region.y <= by
        assert region.x + region.w >= bx + bw
        assert region.y + region.h >= by + bh
        assert 0 <= region.x and 0 <= region.y
        assert region.x + region.w <= 1000
        assert region.y + region.h <= 800

    @given(
        points=st.lists(
            st.tuples(st.integers(0, 1000), st.integers(0, 800)),
            min_size=3, max_size=8),
        margin_a=st.floats(min_value=0, max_value=2, allow_nan=False),
        margin_b=st.floats(min_value=0, max_value=2, allow_nan=False),
    )
    @settings(max_examples=500, deadline=None)
    def test_monotone_in_margin(self, points, margin_a, margin_b):
        assume(not collinear(points))
        small, large = sorted((margin_a, margin_b))
        element = element_for(points)
        inner = context_crop(element, small)
        outer = context_crop(element, large)
        assert outer.x <= inner.x and outer.y <= inner.y
        assert outer.x + outer.w >= inner.x + inner.w
        assert outer.y + outer.h >= inner.y + inner.h


def v3_manifest(canvases: int, *, drop_width_on: int | None = None,
                drop_service_on: int | None = None) -> dict:
    items = []
    for i in range(canvases):
        canvas = {
            "id": f"https://ex.org/canvas/{i}",
            "type": "Canvas",
            "label": {"fr": [f"page {i + 1}"]},
            "width": 2000,
            "height": 2800,
            "items": [{
                "type": "AnnotationPage",
                "items": [{
                    "type": "Annotation",
                    "body": {
                        "id": f"https://ex.org/img/{i}/full/max/0/default.jpg",
                        "type": "Image",
                        "service": [{
                            "id": f"https://ex.org/img/{i}",
                            "type": "ImageService3",
                        }],
                    },
                }],
            }],
        }
        if drop_width_on == i:
            del canvas["width"]
        if drop_service_on == i:
            del canvas["items"][0]["items"][0]["body"]["service"]
        items.append(canvas)
    return {"@context": "http://iiif.io/api/presentation/3/context.json",
            "id": "https://ex.org/manifest", "type": "Manifest", "items": items}


def v2_manifest(canvases: int) -> dict:
    return {
        "@context": "http://iiif.io/api/presentation/2/context.json",
        "@id": "https://ex.org/manifest",
        "@type": "sc:Manifest",
        "sequences": [{
            "canvases": [{
                "@id": f"https://ex.org/canvas/{i}",
                "label": f"f. {i + 1}r",
                "width": 1800,
                "height": 2400,
                "images": [{
                    "resource": {
                        "@id": f"https://ex.org/img/{i}/full/full/0/default.jpg",
                        "service": {"@id": f"https://ex.org/img/{i}"},
                    },
                }],
            } for i in range(canvases)],
        }],
    }


class TestManifestParsing:
    def test_v3_pages_in_order(self):
        pages = parse_manifest(v3_manifest(3))
        assert [p.sequence_index for p in pages] == [0, 1, 2]
        assert pages[0].image_uri == "https://ex.org/img/0"
        assert pages[0].label == "page 1"

    def test_v2_pages(self):
        pages = parse_manifest(v2_manifest(2))
        assert len(pages) == 2
        assert pages[1].label == "f. 2r"
        assert pages[1].width == 1800

    def test_missing_width_raises(self):
        with pytest.raises(ManifestError):
            parse_manifest(v3_manifest(2, drop_width_on=1))

    def test_missing_service_raises(self):
        with pytest.raises(ManifestError):
            parse_manifest(v3_manifest(2, drop_service_on=0))

    def test_unparseable_document(self):
        with pytest.raises(ManifestError):
            parse_manifest("{broken")
        with pytest.raises(ManifestError):
            parse_manifest({"neither": "kind"})

    def test_json_string_accepted(self):
        pages = parse_manifest(json.dumps(v2_manifest(1)))
        assert len(pages) == 1


class TestIngestManifest:
    def test_three_canvas_manifest(self, platform, project):
        created = ingest_manifest(platform.elements, v3_manifest(3),
                                  project.project_id)
        assert [e.order_index for e in created] == [0, 1, 2]
        assert all(e.element_type == "page" for e in created)
        # full-frame polygon
        assert bounding_box(created[0].polygon) == (0, 0, 2000, 2800)

    def test_616_canvas_manifest(self, platform, project):
        created = ingest_manifest(platform.elements, v3_manifest(616),
                                  project.project_id)
        assert len(created) == 616
        assert [e.order_index for e in created] == list(range(616))

    def test_custom_page_type(self, platform, project):
        created = ingest_manifest(platform.elements, v2_manifest(1),
                                  project.project_id, page_type="folio")
        assert created[0].element_type == "folio"
