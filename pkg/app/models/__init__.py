# Parameter and record models