import xml.etree.ElementTree as ET

import pytest

from tlbs.aco import Colony, SolverParams
from tlbs.render import RenderSpec, render_svg
from tlbs.scenario import generate_semi_random

SVG = "{http://www.w3.org/2000/svg}"


def test_scenario_only():
    sc = generate_semi_random(0)
    root = ET.fromstring(render_svg(sc).encode())
    assert len(root.findall(f".//{SVG}g[@id='rois']/{SVG}rect")) == sc.nr
    assert root.findall(f".//{SVG}polyline") == []


def test_paths_colors_and_stations():
    sc = generate_semi_random(1, num_uavs=4)
    sol = Colony(sc, SolverParams(seed=1)).construct()
    spec = RenderSpec(width_px=400, height_px=300, palette=("#000000", "#ffffff"))
    root = ET.fromstring(render_svg(sc, sol, spec).encode())
    lines = root.findall(f".//{SVG}polyline[@class='uav']")
    assert [p.get("stroke") for p in lines] == ["#000000", "#ffffff"] * 2
    assert len(root.findall(f".//{SVG}g[@id='stations']/{SVG}circle")) == sol.nc
    assert root.get("width") == "400" and root.get("height") == "300"


@pytest.mark.parametrize("kw", [{"width_px": 0}, {"palette": ()}])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        RenderSpec(**kw)
