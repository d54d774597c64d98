# Everything that feeds or drives a trust graph: completion backends,
# evidence extraction, the Werewolf harness and the intent pipeline.
