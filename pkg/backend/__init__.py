"""GRATR graph core: trust graph, retrieval, snapshots."""
