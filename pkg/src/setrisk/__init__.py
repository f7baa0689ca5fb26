"""Exact set-valued risk measures for conical market models on finite probability spaces."""
