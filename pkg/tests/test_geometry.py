import pytest
from hypothesis import given, strategies as st

from layoutlab.geometry import (
    BoundingBox,
    Layout,
    ObjectSpec,
    box_center,
    intersection_area,
    layout_from_json,
    layout_to_json,
    round_half_up,
    scale_layout,
    validate_layout,
)

boxes = st.builds(
    BoundingBox,
    x=st.integers(-100, 600),
    y=st.integers(-100, 600),
    w=st.integers(1, 400),
    h=st.integers(1, 400),
)

layouts = st.builds(
    Layout,
    objects=st.lists(
        st.builds(ObjectSpec, description=st.text(min_size=1).filter(str.strip), box=boxes),
        max_size=6,
    ).map(tuple),
    background_prompt=st.text(min_size=1).filter(str.strip),
)


def test_round_half_up():
    assert round_half_up(0.5) == 1
    assert round_half_up(1.5) == 2
    assert round_half_up(2.5) == 3
    assert round_half_up(-0.5) == 0
    assert round_half_up(-1.5) == -1
    assert round_half_up(2.4999) == 2


class TestBoundingBox:
    def test_rejects_non_positive_extent(self):
        with pytest.raises(ValueError):
            BoundingBox(0, 0, 0, 10)
        with pytest.raises(ValueError):
            BoundingBox(0, 0, 10, -1)

    def test_rejects_non_int_fields(self):
        with pytest.raises(ValueError):
            BoundingBox(0.5, 0, 10, 10)
        with pytest.raises(ValueError):
            BoundingBox(True, 0, 10, 10)

    def test_negative_corner_is_representable(self):
        assert BoundingBox(-5, -5, 10, 10).as_list() == [-5, -5, 10, 10]

    def test_center(self):
        assert box_center(BoundingBox(0, 0, 10, 20)) == (5.0, 10.0)
        assert box_center(BoundingBox(5, 152, 139, 168)) == (74.5, 236.0)


class TestIntersectionArea:
    def test_disjoint(self):
        assert intersection_area(BoundingBox(0, 0, 10, 10), BoundingBox(20, 20, 5, 5)) == 0.0

    def test_touching_edges_do_not_overlap(self):
        assert intersection_area(BoundingBox(0, 0, 10, 10), BoundingBox(10, 0, 10, 10)) == 0.0

    def test_partial_overlap(self):
        assert intersection_area(BoundingBox(0, 0, 10, 10), BoundingBox(5, 5, 10, 10)) == 25.0

    def test_containment(self):
        assert intersection_area(BoundingBox(0, 0, 100, 100), BoundingBox(10, 10, 5, 5)) == 25.0

    @given(a=boxes, b=boxes)
    def test_symmetric(self, a, b):
        assert intersection_area(a, b) == intersection_area(b, a)


class TestValidateLayout:
    def test_clean(self):
        layout = Layout(
            (ObjectSpec("a cat", BoundingBox(0, 0, 100, 100)),
             ObjectSpec("a dog", BoundingBox(200, 200, 100, 100))),
            "a room",
        )
        report = validate_layout(layout)
        assert report.is_clean
        assert report.out_of_bounds == ()
        assert report.overlapping == ()

    def test_out_of_bounds_all_sides(self):
        for box in (
            BoundingBox(-1, 0, 10, 10),
            BoundingBox(0, -1, 10, 10),
            BoundingBox(505, 0, 10, 10),
            BoundingBox(0, 505, 10, 10),
        ):
            report = validate_layout(Layout((ObjectSpec("x", box),), "bg"))
            assert report.out_of_bounds == (0,)

    def test_box_filling_canvas_exactly_is_in_bounds(self):
        report = validate_layout(Layout((ObjectSpec("x", BoundingBox(0, 0, 512, 512)),), "bg"))
        assert report.out_of_bounds == ()

    def test_overlapping_pairs(self):
        layout = Layout(
            (ObjectSpec("a", BoundingBox(0, 0, 100, 100)),
             ObjectSpec("b", BoundingBox(50, 50, 100, 100)),
             ObjectSpec("c", BoundingBox(400, 400, 50, 50))),
            "bg",
        )
        assert validate_layout(layout).overlapping == ((0, 1),)


class TestScaleLayout:
    def test_512_to_64(self):
        layout = Layout((ObjectSpec("a skier", BoundingBox(5, 152, 139, 168)),), "snow")
        scaled = scale_layout(layout, (64, 64))
        # 5/8 = 0.625 -> 1, 152/8 = 19, 139/8 = 17.375 -> 17, 168/8 = 21
        assert scaled.objects[0].box.as_list() == [1, 19, 17, 21]
        assert scaled.canvas == (64, 64)
        assert scaled.background_prompt == "snow"
        assert scaled.objects[0].description == "a skier"

    def test_collapsing_extent_clamps_to_one(self):
        layout = Layout((ObjectSpec("dot", BoundingBox(0, 0, 2, 2)),), "bg")
        assert scale_layout(layout, (64, 64)).objects[0].box.as_list() == [0, 0, 1, 1]

    def test_identity_scale(self):
        layout = Layout((ObjectSpec("a", BoundingBox(3, 4, 5, 6)),), "bg")
        assert scale_layout(layout, (512, 512)) == layout

    def test_bad_target(self):
        with pytest.raises(ValueError):
            scale_layout(Layout((), "bg"), (0, 64))

    @given(layouts)
    def test_preserves_text_and_count(self, layout):
        scaled = scale_layout(layout, (64, 64))
        assert len(scaled.objects) == len(layout.objects)
        assert [o.description for o in scaled.objects] == [o.description for o in layout.objects]
        assert scaled.background_prompt == layout.background_prompt


class TestLayoutJson:
    def test_round_trip(self):
        layout = Layout(
            (ObjectSpec("a red circle", BoundingBox(64, 160, 160, 160)),),
            "a white background",
        )
        assert layout_from_json(layout_to_json(layout)) == layout

    @given(layouts)
    def test_round_trip_property(self, layout):
        assert layout_from_json(layout_to_json(layout)) == layout

    def test_schema_shape(self):
        payload = layout_to_json(Layout((ObjectSpec("x", BoundingBox(1, 2, 3, 4)),), "bg"))
        assert payload == {
            "canvas": [512, 512],
            "background_prompt": "bg",
            "objects": [{"description": "x", "box": [1, 2, 3, 4]}],
        }

    @pytest.mark.parametrize(
        "payload",
        [
            {},
            {"canvas": [512], "background_prompt": "bg", "objects": []},
            {"canvas": [512, 512], "background_prompt": "bg", "objects": [{"box": [1, 2, 3, 4]}]},
            {"canvas": [512, 512], "background_prompt": "bg",
             "objects": [{"description": "x", "box": [1, 2, 3]}]},
            {"canvas": [512, 512], "background_prompt": "", "objects": []},
        ],
    )
    def test_bad_payloads(self, payload):
        with pytest.raises(ValueError):
            layout_from_json(payload)


def test_layout_requires_background():
    with pytest.raises(ValueError):
        Layout((), "   ")


def test_layout_coerces_list_of_objects():
    layout = Layout([ObjectSpec("a", BoundingBox(0, 0, 1, 1))], "bg")
    assert isinstance(layout.objects, tuple)
