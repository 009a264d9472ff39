"""Search-space reduction, Q1/Q2 tuning and 2-OPT path correction.

``tuning`` depends on the solver and is imported explicitly as
``tlbs.enhancements.tuning``.
"""
from .hull import HullFilter, convex_hull, roi_hull
from .two_opt import place_stations, roi_orders, two_opt

__all__ = ["HullFilter", "convex_hull", "roi_hull", "place_stations", "roi_orders", "two_opt"]
