# Simulation services