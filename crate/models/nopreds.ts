# No state, so nothing to harvest and no predicates given.
system nopreds
input d : int;
output o : int;
trans: o = d + 1;
