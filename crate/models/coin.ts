# int b, i = 0, a;   /* a > 0 */
# while (i < a) { b = random(); if (b) i = i + 1; }
system coin
state i, a : int;
state b : bool;

init:  i = 0 && a >= 1;
guard: i < a;
# a never changes; b' is left free.
trans: ((b' && i' = i + 1) || (!b' && i' = i)) && a' = a;

predicate: i = 0;
predicate: i < 0;
predicate: i > 0;
predicate: i = a;
predicate: i < a;
predicate: i > a;
predicate: b;
predicate: !b;
