# metrics: MAPE, Maxion-Townsend cost and CP-driven VEA-bility.
