# x = 0; while (x < 10) x = x + 1;   assert x = 10
system bounded
state x : int;

init:  x = 0;
guard: x < 10;
trans: x' = x + 1;
post:  x = 10;
