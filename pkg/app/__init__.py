# Chiral spin-wave zipper simulator