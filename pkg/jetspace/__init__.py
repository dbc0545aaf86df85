# Jet scheme and wedge toolkit for the Nash problem on surface singularities
