# float i = 0;
# while (random()) { i = i + 1; if (i > 2) i = 0; }
system counter
state i : real;

init:  i = 0;
trans: (i + 1 > 2 && i' = 0) || (i + 1 <= 2 && i' = i + 1);

predicate: i <= 0;
predicate: i >= 0;
predicate: i >= 1;
predicate: i <= 1;
predicate: i <= 2;
predicate: i >= 2;
