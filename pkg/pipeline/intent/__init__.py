# Timeline-ordered political message intent classification.
