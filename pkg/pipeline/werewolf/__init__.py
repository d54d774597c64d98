# Eight-player Werewolf harness.
# Seats GRATR agents against baseline / random / no-op agents and scores them.
