File file = new File(path);
BufferedReader br = new BufferedReader(new FileReader(file));
String line = br.readLine().trim();
// parse simple name to fully qualified name
// "BufferedReader()" → "java.io.BufferedReader"
// "String" → "java.lang.String"
// "FileReader()" → "java.io.FileReader"
// "File()" → "java.io.File"
// "File" → "java.io.File"
// "BufferedReader" → "java.io.BufferedReader"
// "readLine()" → "java.io.BufferedReader.readLine()"
// "br" →